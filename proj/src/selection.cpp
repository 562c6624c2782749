#include "blindspot/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

namespace {

/// Strongest in-edge of `target` whose source passes `allowed`; ties go to
/// the lower source index because in_edges is sorted by source.
template <typename Pred>
const Edge* max_in_edge(const CorrelationGraph& graph, PoiIndex target, Pred allowed) {
  const Edge* best = nullptr;
  for (const auto& e : graph.in_edges(target)) {
    if (allowed(e.source) && (best == nullptr || e.weight > best->weight)) best = &e;
  }
  return best;
}

/// Core of both value computations. `selected` flags may be all false.
std::vector<double> weighted_values(const SelectionProblem& problem,
                                    const std::vector<bool>& selected,
                                    CreditStrategy strategy) {
  const auto& graph = problem.graph;
  const std::size_t n = problem.node_count();

  // p'_i: best prediction already available from the selection.
  std::vector<double> covered(n, 0.0);
  for (PoiIndex i = 0; i < n; ++i) {
    if (const Edge* e = max_in_edge(graph, i, [&](PoiIndex j) { return selected[j]; })) {
      covered[i] = e->weight;
    }
  }

  std::vector<double> v(n, 0.0);
  for (PoiIndex i = 0; i < n; ++i) {
    if (!selected[i]) v[i] = (1.0 - covered[i]) * problem.values[i];
  }

  if (strategy == CreditStrategy::MaxPredictor) {
    for (PoiIndex i = 0; i < n; ++i) {
      if (selected[i]) continue;
      const Edge* e = max_in_edge(graph, i, [&](PoiIndex j) { return !selected[j]; });
      if (e != nullptr) {
        v[e->source] += problem.values[i] * std::max(e->weight - covered[i], 0.0);
      }
    }
  } else {
    for (PoiIndex i = 0; i < n; ++i) {
      if (selected[i]) continue;
      for (const auto& e : graph.out_edges(i)) {
        if (!selected[e.target]) {
          v[i] += std::max(e.weight - covered[e.target], 0.0) * problem.values[e.target];
        }
      }
    }
  }
  return v;
}

/// Highest v'/c among candidates; ties go to the lower index.
std::optional<PoiIndex> best_ratio(const std::vector<double>& v, std::span<const double> costs,
                                   const std::vector<bool>& candidate) {
  std::optional<PoiIndex> best;
  double best_ratio = 0.0;
  for (PoiIndex i = 0; i < v.size(); ++i) {
    if (!candidate[i]) continue;
    const double r = v[i] / costs[i];
    if (!best || r > best_ratio) {
      best = i;
      best_ratio = r;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(CreditStrategy strategy) {
  return strategy == CreditStrategy::MaxPredictor ? "max" : "sum";
}

CreditStrategy parse_strategy(std::string_view name) {
  if (name == "max") return CreditStrategy::MaxPredictor;
  if (name == "sum") return CreditStrategy::FullSum;
  throw Error(ErrorCode::Usage, "unknown strategy '" + std::string(name) + "'");
}

void SelectionProblem::validate() const {
  const std::size_t n = graph.node_count();
  if (costs.size() != n || values.size() != n) {
    throw Error(ErrorCode::InvalidProblem, "costs and values must cover every graph node");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(costs[i] > 0.0) || !std::isfinite(costs[i])) {
      throw Error(ErrorCode::InvalidProblem, "cost of node " + graph.nodes()[i] + " must be > 0");
    }
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::InvalidProblem, "value of node " + graph.nodes()[i] + " must be >= 0");
    }
  }
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::InvalidProblem, "budget must be finite and >= 0");
  }
}

std::vector<double> static_values(const SelectionProblem& problem, CreditStrategy strategy) {
  problem.validate();
  return weighted_values(problem, std::vector<bool>(problem.node_count(), false), strategy);
}

std::vector<std::optional<double>> dynamic_values(const SelectionProblem& problem,
                                                  std::span<const PoiIndex> selected,
                                                  CreditStrategy strategy) {
  problem.validate();
  std::vector<bool> flags(problem.node_count(), false);
  for (PoiIndex s : selected) {
    if (s >= flags.size()) throw Error(ErrorCode::InvalidProblem, "selected node out of range");
    flags[s] = true;
  }
  const auto v = weighted_values(problem, flags, strategy);
  std::vector<std::optional<double>> out(v.size());
  for (PoiIndex i = 0; i < v.size(); ++i) {
    if (!flags[i]) out[i] = v[i];
  }
  return out;
}

SelectionResult static_greedy(const SelectionProblem& problem, CreditStrategy strategy) {
  const auto v = static_values(problem, strategy);
  std::vector<PoiIndex> order(v.size());
  std::iota(order.begin(), order.end(), PoiIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](PoiIndex a, PoiIndex b) {
    return v[a] / problem.costs[a] > v[b] / problem.costs[b];
  });

  SelectionResult result;
  for (PoiIndex i : order) {
    if (result.total_cost + problem.costs[i] <= problem.budget) {
      result.total_cost += problem.costs[i];
      result.selected.push_back(i);
      result.weighted_values.push_back(v[i]);
      result.objective_estimate += v[i];
    }
  }
  return result;
}

SelectionResult dynamic_greedy(const SelectionProblem& problem, CreditStrategy strategy) {
  problem.validate();
  const std::size_t n = problem.node_count();
  std::vector<bool> selected(n, false);
  std::vector<bool> uncovered(n, true);
  std::vector<double> v;
  bool stale = true;

  SelectionResult result;
  for (std::size_t round = 0; round < n; ++round) {
    // Once nothing uncovered fits, later rounds only mark nodes covered.
    bool any_fits = false;
    for (PoiIndex i = 0; i < n && !any_fits; ++i) {
      any_fits = uncovered[i] && result.total_cost + problem.costs[i] <= problem.budget;
    }
    if (!any_fits) break;

    if (stale) {
      v = weighted_values(problem, selected, strategy);
      stale = false;
    }
    const PoiIndex x = *best_ratio(v, problem.costs, uncovered);
    uncovered[x] = false;
    if (result.total_cost + problem.costs[x] <= problem.budget) {
      selected[x] = true;
      stale = true;
      result.total_cost += problem.costs[x];
      result.selected.push_back(x);
      result.weighted_values.push_back(v[x]);
      result.objective_estimate += v[x];
    }
  }
  return result;
}

SelectionResult random_selection(const SelectionProblem& problem, std::uint64_t seed) {
  const auto v = static_values(problem, CreditStrategy::MaxPredictor);
  std::vector<PoiIndex> order(v.size());
  std::iota(order.begin(), order.end(), PoiIndex{0});
  Rng rng(seed);
  rng.shuffle(order);

  SelectionResult result;
  for (PoiIndex i : order) {
    if (result.total_cost + problem.costs[i] <= problem.budget) {
      result.total_cost += problem.costs[i];
      result.selected.push_back(i);
      result.weighted_values.push_back(v[i]);
      result.objective_estimate += v[i];
    }
  }
  return result;
}

double coverage_value(const SelectionProblem& problem, std::span<const PoiIndex> subset) {
  const std::size_t n = problem.node_count();
  std::vector<bool> chosen(n, false);
  for (PoiIndex s : subset) chosen.at(s) = true;
  double total = 0.0;
  for (PoiIndex j = 0; j < n; ++j) {
    if (chosen[j]) {
      total += problem.values[j];
    } else if (const Edge* e =
                   max_in_edge(problem.graph, j, [&](PoiIndex i) { return chosen[i]; })) {
      total += problem.values[j] * e->weight;
    }
  }
  return total;
}

SelectionResult exhaustive_oracle(const SelectionProblem& problem,
                                  const SubsetObjective& objective) {
  problem.validate();
  const std::size_t n = problem.node_count();
  if (n > kOracleMaxNodes) {
    throw Error(ErrorCode::TooManyNodes, "exhaustive oracle limited to " +
                                             std::to_string(kOracleMaxNodes) + " nodes, got " +
                                             std::to_string(n));
  }
  auto score = [&](std::span<const PoiIndex> s) {
    return objective ? objective(s) : coverage_value(problem, s);
  };

  std::vector<PoiIndex> best;
  double best_score = 0.0;
  double best_cost = 0.0;
  bool have_best = false;
  std::vector<PoiIndex> subset;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    subset.clear();
    double cost = 0.0;
    for (PoiIndex i = 0; i < n; ++i) {
      if (bits >> i & 1U) {
        subset.push_back(i);
        cost += problem.costs[i];
      }
    }
    if (cost > problem.budget) continue;
    const double s = score(subset);
    if (!have_best || s > best_score || (s == best_score && subset < best)) {
      best = subset;
      best_score = s;
      best_cost = cost;
      have_best = true;
    }
  }

  SelectionResult result;
  const auto v = weighted_values(problem, std::vector<bool>(n, false), CreditStrategy::MaxPredictor);
  result.selected = best;
  result.total_cost = best_cost;
  for (PoiIndex i : best) result.weighted_values.push_back(v[i]);
  result.objective_estimate = best_score;
  return result;
}

void write_selection_csv(const SelectionResult& result, const SelectionProblem& problem,
                         const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "rank,poi_id,cost,weighted_value_at_pick\n";
  for (std::size_t k = 0; k < result.selected.size(); ++k) {
    const PoiIndex i = result.selected[k];
    out << k + 1 << ',' << problem.graph.nodes()[i] << ',' << csv::format_double(problem.costs[i])
        << ',' << csv::format_double(result.weighted_values[k]) << '\n';
  }
  csv::finish_output(out, path);
}

}  // namespace blindspot
