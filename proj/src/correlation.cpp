#include "blindspot/correlation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"

namespace blindspot {

std::string_view to_string(CorrelationMetric metric) {
  switch (metric) {
    case CorrelationMetric::KendallTau: return "kt";
    case CorrelationMetric::ChangeCorrelation: return "change";
    case CorrelationMetric::ChangeCorrelationLiteral: return "change-literal";
  }
  return "kt";
}

CorrelationMetric parse_metric(std::string_view name) {
  if (name == "kt") return CorrelationMetric::KendallTau;
  if (name == "change") return CorrelationMetric::ChangeCorrelation;
  if (name == "change-literal") return CorrelationMetric::ChangeCorrelationLiteral;
  throw Error(ErrorCode::Usage, "unknown metric '" + std::string(name) + "'");
}

double kendall_tau(std::span<const State> x, std::span<const State> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "kendall_tau lengths differ");
  if (x.empty()) throw Error(ErrorCode::EmptySeries, "kendall_tau of empty series");
  std::size_t disagree = 0;
  for (std::size_t i = 0; i < x.size(); ++i) disagree += (x[i] ^ y[i]) & 1U;
  return 1.0 - static_cast<double>(disagree) / static_cast<double>(x.size());
}

double change_correlation(std::span<const Delta> dx, std::span<const Delta> dy, ChangeRule rule) {
  if (dx.size() != dy.size()) {
    throw Error(ErrorCode::LengthMismatch, "change_correlation lengths differ");
  }
  std::size_t agree = 0;
  std::size_t proxy_changes = 0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (dy[i] != 0) ++proxy_changes;
    if (dx[i] == dy[i] && (rule == ChangeRule::Literal || dy[i] != 0)) ++agree;
  }
  if (proxy_changes == 0) return 0.0;
  return static_cast<double>(agree) / static_cast<double>(proxy_changes);
}

PairwiseScores::PairwiseScores(std::size_t poi_count, std::size_t horizon,
                               CorrelationMetric metric, std::vector<double> scores)
    : n_(poi_count), horizon_(horizon), metric_(metric), scores_(std::move(scores)) {
  if (scores_.size() != n_ * n_) throw Error(ErrorCode::ShapeMismatch, "score table size");
}

PairwiseScores pairwise_scores(const Scenario& scenario, std::size_t horizon,
                               CorrelationMetric metric) {
  if (horizon == 0 || horizon > scenario.cycle_count()) {
    throw Error(ErrorCode::InvalidHorizon,
                "history horizon " + std::to_string(horizon) + " outside 1.." +
                    std::to_string(scenario.cycle_count()));
  }
  const std::size_t n = scenario.poi_count();
  std::vector<double> scores(n * n, 0.0);

  if (metric == CorrelationMetric::KendallTau) {
    for (PoiIndex i = 0; i < n; ++i) {
      std::span<const State> xi(scenario.series(i).data(), horizon);
      scores[i * n + i] = 1.0;
      for (PoiIndex j = i + 1; j < n; ++j) {
        const double kt = kendall_tau(xi, std::span<const State>(scenario.series(j).data(), horizon));
        scores[i * n + j] = kt;
        scores[j * n + i] = kt;
      }
    }
  } else {
    const auto rule = metric == CorrelationMetric::ChangeCorrelation ? ChangeRule::Restricted
                                                                     : ChangeRule::Literal;
    std::vector<ChangeSeries> changes;
    changes.reserve(n);
    for (PoiIndex i = 0; i < n; ++i) {
      changes.push_back(
          change_series(std::span<const State>(scenario.series(i).data(), horizon)));
    }
    for (PoiIndex source = 0; source < n; ++source) {
      for (PoiIndex target = 0; target < n; ++target) {
        scores[source * n + target] = change_correlation(changes[target], changes[source], rule);
      }
    }
  }
  return PairwiseScores(n, horizon, metric, std::move(scores));
}

CorrelationGraph::CorrelationGraph(std::vector<std::string> nodes, CorrelationMetric metric,
                                   double threshold, std::size_t horizon)
    : nodes_(std::move(nodes)),
      metric_(metric),
      threshold_(threshold),
      horizon_(horizon),
      in_(nodes_.size()),
      out_(nodes_.size()) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "edge threshold must be in [0, 1]");
  }
}

void CorrelationGraph::add_edge(PoiIndex source, PoiIndex target, double weight) {
  if (source >= nodes_.size() || target >= nodes_.size()) {
    throw Error(ErrorCode::InvalidProblem, "edge endpoint out of range");
  }
  if (source == target) throw Error(ErrorCode::InvalidProblem, "self-edge on " + nodes_[source]);
  if (!(weight >= threshold_) || !std::isfinite(weight)) {
    throw Error(ErrorCode::InvalidProblem, "edge weight below graph threshold");
  }
  auto& outs = out_[source];
  auto pos = std::lower_bound(outs.begin(), outs.end(), target,
                              [](const Edge& e, PoiIndex t) { return e.target < t; });
  if (pos != outs.end() && pos->target == target) {
    throw Error(ErrorCode::InvalidProblem,
                "duplicate edge " + nodes_[source] + " -> " + nodes_[target]);
  }
  const Edge edge{source, target, weight};
  outs.insert(pos, edge);
  auto& ins = in_[target];
  ins.insert(std::lower_bound(ins.begin(), ins.end(), source,
                              [](const Edge& e, PoiIndex s) { return e.source < s; }),
             edge);
  ++edge_count_;
}

std::optional<double> CorrelationGraph::weight(PoiIndex source, PoiIndex target) const {
  const auto& outs = out_.at(source);
  auto pos = std::lower_bound(outs.begin(), outs.end(), target,
                              [](const Edge& e, PoiIndex t) { return e.target < t; });
  if (pos == outs.end() || pos->target != target) return std::nullopt;
  return pos->weight;
}

std::vector<Edge> CorrelationGraph::edges() const {
  std::vector<Edge> all;
  all.reserve(edge_count_);
  for (const auto& outs : out_) all.insert(all.end(), outs.begin(), outs.end());
  return all;
}

bool CorrelationGraph::operator==(const CorrelationGraph& other) const {
  return nodes_ == other.nodes_ && metric_ == other.metric_ && threshold_ == other.threshold_ &&
         horizon_ == other.horizon_ && out_ == other.out_;
}

CorrelationGraph graph_from_scores(const PairwiseScores& scores,
                                   std::span<const std::string> nodes, double threshold) {
  if (nodes.size() != scores.poi_count()) {
    throw Error(ErrorCode::ShapeMismatch, "node list does not match score table");
  }
  CorrelationGraph graph(std::vector<std::string>(nodes.begin(), nodes.end()), scores.metric(),
                         threshold, scores.horizon());
  for (PoiIndex s = 0; s < nodes.size(); ++s) {
    for (PoiIndex t = 0; t < nodes.size(); ++t) {
      if (s != t && scores(s, t) >= threshold) graph.add_edge(s, t, scores(s, t));
    }
  }
  return graph;
}

CorrelationGraph build_graph(const Scenario& scenario, std::size_t horizon,
                             CorrelationMetric metric, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "edge threshold must be in [0, 1]");
  }
  return graph_from_scores(pairwise_scores(scenario, horizon, metric), scenario.ids(), threshold);
}

std::optional<ProxyMatch> best_proxy(const PairwiseScores& scores, PoiIndex target,
                                     std::span<const PoiIndex> candidates) {
  std::optional<ProxyMatch> best;
  for (PoiIndex c : candidates) {
    if (c == target) continue;
    const double s = scores(c, target);
    if (!best || s > best->score || (s == best->score && c < best->proxy)) {
      best = ProxyMatch{c, s};
    }
  }
  return best;
}

ProxyMatch best_proxy(PoiIndex target, std::span<const PoiIndex> candidates,
                      const Scenario& scenario, std::size_t horizon, CorrelationMetric metric) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no proxy candidates");
  if (std::find(candidates.begin(), candidates.end(), target) != candidates.end()) {
    throw Error(ErrorCode::OutOfRange, "target listed among its own proxy candidates");
  }
  if (horizon == 0 || horizon > scenario.cycle_count()) {
    throw Error(ErrorCode::InvalidHorizon, "history horizon out of range");
  }
  std::span<const State> x(scenario.series(target).data(), horizon);
  ChangeSeries dx;
  if (metric != CorrelationMetric::KendallTau) dx = change_series(x);
  const auto rule = metric == CorrelationMetric::ChangeCorrelationLiteral ? ChangeRule::Literal
                                                                          : ChangeRule::Restricted;

  std::optional<ProxyMatch> best;
  for (PoiIndex c : candidates) {
    std::span<const State> y(scenario.series(c).data(), horizon);
    const double s = metric == CorrelationMetric::KendallTau
                         ? kendall_tau(x, y)
                         : change_correlation(dx, change_series(y), rule);
    if (!best || s > best->score || (s == best->score && c < best->proxy)) {
      best = ProxyMatch{c, s};
    }
  }
  return *best;
}

void write_graph_csv(const CorrelationGraph& graph, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "# metric=" << to_string(graph.metric())
      << " threshold=" << csv::format_double(graph.threshold())
      << " horizon=" << graph.horizon() << '\n';
  out << "source,target,weight\n";
  for (const auto& e : graph.edges()) {
    out << graph.nodes()[e.source] << ',' << graph.nodes()[e.target] << ','
        << csv::format_double(e.weight) << '\n';
  }
  csv::finish_output(out, path);
}

CorrelationGraph read_graph_csv(const std::filesystem::path& path,
                                std::vector<std::string> nodes) {
  csv::Reader reader(path);
  reader.expect_header("source,target,weight");

  CorrelationMetric metric = CorrelationMetric::KendallTau;
  double threshold = 0.0;
  std::size_t horizon = 0;
  for (const auto& comment : reader.comments()) {
    std::istringstream words(comment);
    std::string word;
    while (words >> word) {
      auto eq = word.find('=');
      if (eq == std::string::npos) continue;
      auto key = word.substr(0, eq);
      auto value = std::string_view(word).substr(eq + 1);
      if (key == "metric") {
        metric = parse_metric(value);
      } else if (key == "threshold") {
        threshold = csv::parse_double(value, reader.line(), "threshold");
      } else if (key == "horizon") {
        horizon = static_cast<std::size_t>(csv::parse_int(value, reader.line(), "horizon"));
      }
    }
  }

  std::unordered_map<std::string, PoiIndex> index;
  for (PoiIndex i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], i);
  CorrelationGraph graph(std::move(nodes), metric, threshold, horizon);

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(fields.size()));
    auto s = index.find(fields[0]);
    auto t = index.find(fields[1]);
    if (s == index.end()) reader.fail("unknown node '" + fields[0] + "'");
    if (t == index.end()) reader.fail("unknown node '" + fields[1] + "'");
    const double w = csv::parse_double(fields[2], reader.line(), "weight");
    try {
      graph.add_edge(s->second, t->second, w);
    } catch (const Error& e) {
      reader.fail(e.what());
    }
  }
  return graph;
}

}  // namespace blindspot
