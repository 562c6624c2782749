#include "blindspot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

namespace {

/// Order-insensitive accumulator: sum and sum of squares.
struct ErrorStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double e) {
    sum += e;
    sum_sq += e * e;
    ++count;
  }

  CurvePoint point(double fraction) const {
    CurvePoint p;
    p.fraction = fraction;
    p.trials = count;
    if (count == 0) return p;
    p.mean_error = sum / static_cast<double>(count);
    if (count > 1) {
      const double var =
          (sum_sq - sum * sum / static_cast<double>(count)) / static_cast<double>(count - 1);
      p.std_error = std::sqrt(std::max(var, 0.0));
    }
    return p;
  }
};

std::vector<State> states_at(const Scenario& truth, std::span<const PoiIndex> pois,
                             std::size_t cycle) {
  std::vector<State> out(pois.size());
  for (std::size_t k = 0; k < pois.size(); ++k) out[k] = truth.state(pois[k], cycle);
  return out;
}

Predictor predictor_for_metric(CorrelationMetric metric, const ExperimentSpec& spec) {
  switch (metric) {
    case CorrelationMetric::KendallTau: return Predictor::best_proxy_kt(spec.edge_threshold);
    case CorrelationMetric::ChangeCorrelation: return Predictor::hybrid(spec.hybrid_threshold);
    case CorrelationMetric::ChangeCorrelationLiteral: {
      auto p = Predictor::hybrid(spec.hybrid_threshold);
      p.change_rule = ChangeRule::Literal;
      return p;
    }
  }
  return Predictor::hybrid(spec.hybrid_threshold);
}

std::string selection_label(SelectorKind selector, CorrelationMetric metric,
                            const Predictor& predictor) {
  std::string name;
  switch (selector) {
    case SelectorKind::StaticGreedy: name = "StaticGreedy"; break;
    case SelectorKind::DynamicGreedy: name = "DynamicGreedy"; break;
    case SelectorKind::RandomSelection: name = "RandomSelection"; break;
    case SelectorKind::RandomMask: name = "RandomMask"; break;
  }
  name += "/" + predictor.label();
  if (metric == CorrelationMetric::ChangeCorrelationLiteral) name += "-literal";
  return name;
}

}  // namespace

std::string_view to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::RandomMask: return "random-mask";
    case SelectorKind::StaticGreedy: return "static";
    case SelectorKind::DynamicGreedy: return "dynamic";
    case SelectorKind::RandomSelection: return "random-selection";
  }
  return "random-mask";
}

SelectorKind parse_selector(std::string_view name) {
  if (name == "random-mask") return SelectorKind::RandomMask;
  if (name == "static") return SelectorKind::StaticGreedy;
  if (name == "dynamic") return SelectorKind::DynamicGreedy;
  if (name == "random-selection") return SelectorKind::RandomSelection;
  throw Error(ErrorCode::Usage, "unknown selector '" + std::string(name) + "'");
}

std::vector<double> default_fractions() {
  std::vector<double> out;
  for (int k = 1; k <= 10; ++k) out.push_back(k / 20.0);
  return out;
}

std::vector<std::string> default_baselines() {
  return {"Random", "LastKnownState", "Majority", "BestProxyKT"};
}

void ExperimentSpec::validate() const {
  if (eval_cycles.empty()) throw Error(ErrorCode::InvalidConfig, "no evaluation cycles");
  for (auto c : eval_cycles) {
    if (c == 0 || c > scenario.cycle_count()) {
      throw Error(ErrorCode::InvalidCycle, "evaluation cycle " + std::to_string(c) +
                                               " outside 1.." +
                                               std::to_string(scenario.cycle_count()));
    }
  }
  if (fractions.empty()) throw Error(ErrorCode::InvalidConfig, "no fractions");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidFraction, "fraction outside (0, 1]");
  }
  if (trials == 0) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  if (!(edge_threshold >= 0.0 && edge_threshold <= 1.0) ||
      !(hybrid_threshold >= 0.0 && hybrid_threshold <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "thresholds must be in [0, 1]");
  }
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t cycle, std::size_t fraction_index,
                         std::size_t trial, std::uint64_t stream) {
  return derive_seed({master_seed, cycle, fraction_index, trial, stream});
}

double budget_for_fraction(double fraction, std::span<const double> costs) {
  double total = 0.0;
  for (double c : costs) total += c;
  const double w = fraction * total;
  const double nearest = std::round(w);
  if (std::abs(w - nearest) <= 1e-9 * std::max(1.0, w)) return nearest;
  return w;
}

double error_rate(const Scenario& truth, const PredictionResult& result) {
  if (result.predictions.empty()) return 0.0;
  std::size_t wrong = 0;
  for (const auto& p : result.predictions) wrong += p.state != truth.state(p.poi, result.cycle);
  return static_cast<double>(wrong) / static_cast<double>(result.predictions.size());
}

double run_trial(const PredictionContext& context, const Scenario& truth,
                 const Predictor& predictor, const KnownMask& known) {
  const auto states = states_at(truth, known.known(), known.cycle());
  return error_rate(truth, predict(predictor, context, known, states));
}

double run_trial(const Scenario& scenario, std::size_t cycle, const Predictor& predictor,
                 const KnownMask& known) {
  if (known.cycle() != cycle) throw Error(ErrorCode::MaskMismatch, "mask is for another cycle");
  return run_trial(PredictionContext(scenario, cycle), scenario, predictor, known);
}

std::vector<ExperimentCurve> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Scenario& truth = spec.scenario;
  const std::size_t n = truth.poi_count();
  const auto costs = truth.costs();
  const auto values = truth.values();

  auto has = [&](SelectorKind k) {
    return std::find(spec.selectors.begin(), spec.selectors.end(), k) != spec.selectors.end();
  };

  std::vector<ExperimentCurve> curves;
  for (std::size_t cycle : spec.eval_cycles) {
    const PredictionContext context(truth, cycle);

    if (has(SelectorKind::RandomMask)) {
      std::vector<std::vector<ErrorStats>> stats(
          spec.predictors.size(), std::vector<ErrorStats>(spec.fractions.size()));
      for (std::size_t fi = 0; fi < spec.fractions.size(); ++fi) {
        for (std::size_t t = 0; t < spec.trials; ++t) {
          // Every predictor sees the same mask in a given trial.
          const auto mask = mask_random(truth, cycle, spec.fractions[fi],
                                        trial_seed(spec.master_seed, cycle, fi, t, 0));
          for (std::size_t p = 0; p < spec.predictors.size(); ++p) {
            Predictor predictor = spec.predictors[p];
            if (predictor.kind == PredictorKind::Random) {
              predictor.seed = trial_seed(spec.master_seed, cycle, fi, t, 1);
            }
            stats[p][fi].add(run_trial(context, truth, predictor, mask));
          }
        }
      }
      for (std::size_t p = 0; p < spec.predictors.size(); ++p) {
        ExperimentCurve curve{spec.predictors[p].label(), SelectorKind::RandomMask, cycle, {}};
        for (std::size_t fi = 0; fi < spec.fractions.size(); ++fi) {
          curve.points.push_back(stats[p][fi].point(spec.fractions[fi]));
        }
        curves.push_back(std::move(curve));
      }
    }

    for (SelectorKind selector : spec.selectors) {
      if (selector == SelectorKind::RandomMask) continue;
      for (CorrelationMetric metric : spec.metrics) {
        const Predictor predictor = predictor_for_metric(metric, spec);
        SelectionProblem problem;
        problem.graph = context.has_history()
                            ? graph_from_scores(metric == CorrelationMetric::KendallTau
                                                    ? context.kendall()
                                                    : context.change(predictor.change_rule),
                                                truth.ids(), spec.edge_threshold)
                            : CorrelationGraph({truth.ids().begin(), truth.ids().end()}, metric,
                                               spec.edge_threshold, 0);
        problem.costs.assign(costs.begin(), costs.end());
        problem.values.assign(values.begin(), values.end());

        ExperimentCurve curve{selection_label(selector, metric, predictor), selector, cycle, {}};
        for (std::size_t fi = 0; fi < spec.fractions.size(); ++fi) {
          problem.budget = budget_for_fraction(spec.fractions[fi], costs);
          ErrorStats stats;
          auto score = [&](const SelectionResult& chosen) {
            stats.add(run_trial(context, truth, predictor, KnownMask(n, cycle, chosen.selected)));
          };
          if (selector == SelectorKind::StaticGreedy) {
            score(static_greedy(problem, spec.strategy));
          } else if (selector == SelectorKind::DynamicGreedy) {
            score(dynamic_greedy(problem, spec.strategy));
          } else {
            for (std::size_t t = 0; t < spec.trials; ++t) {
              score(random_selection(problem, trial_seed(spec.master_seed, cycle, fi, t, 2)));
            }
          }
          curve.points.push_back(stats.point(spec.fractions[fi]));
        }
        curves.push_back(std::move(curve));
      }
    }
  }
  return curves;
}

OverageReport worst_case_overage(std::span<const ExperimentCurve> curves,
                                 std::span<const std::string> baselines) {
  std::vector<std::string> algorithms;
  std::map<std::string, std::map<std::size_t, const ExperimentCurve*>> by_algorithm;
  std::set<std::size_t> cycles;
  const std::vector<CurvePoint>* reference = nullptr;

  for (const auto& c : curves) {
    if (c.selector != SelectorKind::RandomMask) continue;
    if (!by_algorithm.count(c.algorithm)) algorithms.push_back(c.algorithm);
    if (!by_algorithm[c.algorithm].emplace(c.cycle, &c).second) {
      throw Error(ErrorCode::ShapeMismatch, "duplicate curve for " + c.algorithm);
    }
    cycles.insert(c.cycle);
    if (reference == nullptr) reference = &c.points;
    if (c.points.size() != reference->size()) {
      throw Error(ErrorCode::ShapeMismatch, c.algorithm + " has a different fraction grid");
    }
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      if (c.points[k].fraction != (*reference)[k].fraction) {
        throw Error(ErrorCode::ShapeMismatch, c.algorithm + " has a different fraction grid");
      }
    }
  }
  if (algorithms.empty()) throw Error(ErrorCode::ShapeMismatch, "no curves");
  for (const auto& name : algorithms) {
    if (by_algorithm[name].size() != cycles.size()) {
      throw Error(ErrorCode::ShapeMismatch, name + " is missing cycles");
    }
  }
  std::vector<std::string> pool;
  for (const auto& b : baselines) {
    if (by_algorithm.count(b)) pool.push_back(b);
  }
  if (pool.empty()) throw Error(ErrorCode::ShapeMismatch, "no baseline curves present");

  OverageReport report;
  const std::size_t grid = reference->size();
  for (const auto& name : algorithms) {
    for (std::size_t k = 0; k < grid; ++k) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t cycle : cycles) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : pool) best = std::min(best, by_algorithm[b][cycle]->points[k].mean_error);
        worst = std::max(worst, by_algorithm[name][cycle]->points[k].mean_error - best);
      }
      report.push_back({name, (*reference)[k].fraction, worst});
    }
  }
  return report;
}

ExperimentSpec parse_experiment_spec(std::string_view json_text, Scenario scenario,
                                     const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("experiment spec: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "experiment spec must be an object");
  static const std::set<std::string> known = {
      "eval_cycles", "fractions",        "trials",   "predictors",  "selectors", "metrics",
      "edge_threshold", "hybrid_threshold", "strategy", "master_seed", "external",  "baselines"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown spec field '" + key + "'");
  }

  ExperimentSpec spec;
  spec.scenario = std::move(scenario);
  try {
    if (doc.contains("eval_cycles")) {
      spec.eval_cycles = doc.at("eval_cycles").get<std::vector<std::size_t>>();
    } else {
      for (std::size_t c = 2; c <= spec.scenario.cycle_count(); ++c) spec.eval_cycles.push_back(c);
    }
    spec.fractions = doc.value("fractions", spec.fractions);
    spec.trials = doc.value("trials", spec.trials);
    spec.edge_threshold = doc.value("edge_threshold", spec.edge_threshold);
    spec.hybrid_threshold = doc.value("hybrid_threshold", spec.hybrid_threshold);
    spec.master_seed = doc.value("master_seed", spec.master_seed);
    spec.strategy = parse_strategy(doc.value("strategy", std::string("max")));

    const auto predictor_names = doc.value(
        "predictors", std::vector<std::string>{"random", "last", "majority", "bestproxy", "hybrid"});
    for (const auto& name : predictor_names) {
      Predictor p = parse_predictor(name);
      if (p.kind == PredictorKind::BestProxyKT) p.edge_threshold = spec.edge_threshold;
      if (p.kind == PredictorKind::Hybrid && !p.adaptive) p.threshold = spec.hybrid_threshold;
      spec.predictors.push_back(p);
    }
    if (doc.contains("selectors")) {
      spec.selectors.clear();
      for (const auto& s : doc.at("selectors").get<std::vector<std::string>>()) {
        spec.selectors.push_back(parse_selector(s));
      }
    }
    if (doc.contains("metrics")) {
      spec.metrics.clear();
      for (const auto& m : doc.at("metrics").get<std::vector<std::string>>()) {
        spec.metrics.push_back(parse_metric(m));
      }
    }
    if (doc.contains("baselines")) {
      spec.baselines = doc.at("baselines").get<std::vector<std::string>>();
    }
    if (doc.contains("external")) {
      for (const auto& ext : doc.at("external")) {
        const auto label = ext.at("label").get<std::string>();
        std::filesystem::path path = ext.at("path").get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        spec.predictors.push_back(
            Predictor::from_external(read_predictions_csv(path, spec.scenario, label)));
        if (ext.value("baseline", true)) spec.baselines.push_back(label);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

void write_results_csv(std::span<const ExperimentCurve> curves, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "algorithm,cycle,fraction,mean_error,std_error,trials\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.algorithm << ',' << c.cycle << ',' << csv::format_double(p.fraction) << ','
          << csv::format_double(p.mean_error) << ',' << csv::format_double(p.std_error) << ','
          << p.trials << '\n';
    }
  }
  csv::finish_output(out, path);
}

void write_overage_csv(const OverageReport& report, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "algorithm,fraction,worst_case_overage\n";
  for (const auto& row : report) {
    out << row.algorithm << ',' << csv::format_double(row.fraction) << ','
        << csv::format_double(row.worst_case_overage) << '\n';
  }
  csv::finish_output(out, path);
}

}  // namespace blindspot
