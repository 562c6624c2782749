#include "blindspot/prediction.hpp"

#include <algorithm>
#include <cmath>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, std::string(name) + " must be in [0, 1]");
  }
}

State last_known(const PredictionContext& ctx, PoiIndex poi) { return ctx.last_states()[poi]; }

}  // namespace

std::string_view to_string(PredictionMode mode) {
  switch (mode) {
    case PredictionMode::Spatial: return "spatial";
    case PredictionMode::Temporal: return "temporal";
    case PredictionMode::MajorityVote: return "majority";
    case PredictionMode::RandomGuess: return "random";
    case PredictionMode::ProxyCopy: return "proxy";
  }
  return "temporal";
}

void ExternalPredictions::set(std::size_t cycle, PoiIndex poi, State state) {
  if (poi >= poi_count_) throw Error(ErrorCode::MaskMismatch, "external prediction POI out of range");
  if (state > 1) throw Error(ErrorCode::InvalidState, "external prediction must be 0 or 1");
  auto& row = by_cycle_[cycle];
  if (row.empty()) row.resize(poi_count_);
  if (row[poi]) throw Error(ErrorCode::DuplicateRecord, "external prediction given twice");
  row[poi] = state;
}

std::optional<State> ExternalPredictions::get(std::size_t cycle, PoiIndex poi) const {
  auto it = by_cycle_.find(cycle);
  if (it == by_cycle_.end() || poi >= it->second.size()) return std::nullopt;
  return it->second[poi];
}

Predictor Predictor::random(std::uint64_t seed) {
  Predictor p;
  p.kind = PredictorKind::Random;
  p.seed = seed;
  return p;
}

Predictor Predictor::last_known_state() { return Predictor{}; }

Predictor Predictor::majority() {
  Predictor p;
  p.kind = PredictorKind::Majority;
  return p;
}

Predictor Predictor::best_proxy_kt(double edge_threshold) {
  check_unit(edge_threshold, "edge threshold");
  Predictor p;
  p.kind = PredictorKind::BestProxyKT;
  p.edge_threshold = edge_threshold;
  return p;
}

Predictor Predictor::hybrid(double threshold) {
  check_unit(threshold, "hybrid threshold");
  Predictor p;
  p.kind = PredictorKind::Hybrid;
  p.threshold = threshold;
  return p;
}

Predictor Predictor::hybrid_adaptive() {
  Predictor p = hybrid();
  p.adaptive = true;
  return p;
}

Predictor Predictor::from_external(std::shared_ptr<const ExternalPredictions> table) {
  Predictor p;
  p.kind = PredictorKind::External;
  p.external = std::move(table);
  return p;
}

std::string Predictor::label() const {
  switch (kind) {
    case PredictorKind::Random: return "Random";
    case PredictorKind::LastKnownState: return "LastKnownState";
    case PredictorKind::Majority: return "Majority";
    case PredictorKind::BestProxyKT: return "BestProxyKT";
    case PredictorKind::Hybrid: return adaptive ? "HybridAdaptive" : "Hybrid";
    case PredictorKind::External: return external ? external->label() : "External";
  }
  return "Unknown";
}

Predictor parse_predictor(std::string_view name) {
  if (name == "random") return Predictor::random(0);
  if (name == "last") return Predictor::last_known_state();
  if (name == "majority") return Predictor::majority();
  if (name == "bestproxy") return Predictor::best_proxy_kt();
  if (name == "hybrid") return Predictor::hybrid();
  if (name == "hybrid-adaptive") return Predictor::hybrid_adaptive();
  throw Error(ErrorCode::Usage, "unknown predictor '" + std::string(name) + "'");
}

PredictionContext::PredictionContext(const Scenario& history, std::size_t cycle)
    : cycle_(cycle), last_(history.poi_count()) {
  if (cycle == 0) throw Error(ErrorCode::InvalidCycle, "cycles are 1-based");
  if (history.cycle_count() + 1 < cycle) {
    throw Error(ErrorCode::MissingHistory,
                "predicting cycle " + std::to_string(cycle) + " needs history through cycle " +
                    std::to_string(cycle - 1) + ", trace has " +
                    std::to_string(history.cycle_count()));
  }
  for (PoiIndex i = 0; i < last_.size(); ++i) last_[i] = history.state(i, cycle - 1);
  if (has_history()) {
    kendall_ = pairwise_scores(history, cycle - 1, CorrelationMetric::KendallTau);
    change_ = pairwise_scores(history, cycle - 1, CorrelationMetric::ChangeCorrelation);
    change_literal_ =
        pairwise_scores(history, cycle - 1, CorrelationMetric::ChangeCorrelationLiteral);
  }
}

PredictionResult predict(const Predictor& predictor, const PredictionContext& context,
                         const KnownMask& mask, std::span<const State> known_states) {
  if (mask.cycle() != context.cycle()) {
    throw Error(ErrorCode::MaskMismatch, "mask cycle differs from prediction cycle");
  }
  if (mask.poi_count() != context.poi_count()) {
    throw Error(ErrorCode::MaskMismatch, "mask POI count differs from history");
  }
  const auto known = mask.known();
  if (known_states.size() != known.size()) {
    throw Error(ErrorCode::MaskMismatch, "known states do not match the mask");
  }
  for (State s : known_states) {
    if (s > 1) throw Error(ErrorCode::InvalidState, "known state must be 0 or 1");
  }

  // Current state of each known POI, indexed by POI.
  std::vector<int> current(context.poi_count(), -1);
  for (std::size_t k = 0; k < known.size(); ++k) current[known[k]] = known_states[k];

  PredictionResult result;
  result.cycle = context.cycle();
  const auto unknown = mask.unknown();
  result.predictions.reserve(unknown.size());

  auto temporal = [&](PoiIndex poi) {
    return Prediction{poi, last_known(context, poi), PredictionMode::Temporal};
  };

  switch (predictor.kind) {
    case PredictorKind::Random: {
      Rng rng(predictor.seed);
      for (PoiIndex poi : unknown) {
        result.predictions.push_back(
            {poi, static_cast<State>(rng.next() >> 63), PredictionMode::RandomGuess});
      }
      break;
    }
    case PredictorKind::LastKnownState:
      for (PoiIndex poi : unknown) result.predictions.push_back(temporal(poi));
      break;
    case PredictorKind::Majority: {
      const auto ones = static_cast<std::size_t>(
          std::count(known_states.begin(), known_states.end(), State{1}));
      const State vote = 2 * ones >= known_states.size() ? 1 : 0;
      for (PoiIndex poi : unknown) {
        result.predictions.push_back({poi, vote, PredictionMode::MajorityVote});
      }
      break;
    }
    case PredictorKind::BestProxyKT: {
      for (PoiIndex poi : unknown) {
        std::optional<ProxyMatch> proxy;
        if (context.has_history()) proxy = best_proxy(context.kendall(), poi, known);
        if (proxy && proxy->score >= predictor.edge_threshold) {
          result.predictions.push_back(
              {poi, static_cast<State>(current[proxy->proxy]), PredictionMode::ProxyCopy});
        } else {
          result.predictions.push_back(temporal(poi));
        }
      }
      break;
    }
    case PredictorKind::Hybrid: {
      double threshold = predictor.threshold;
      if (predictor.adaptive && !known.empty()) {
        std::vector<State> previous(known.size());
        for (std::size_t k = 0; k < known.size(); ++k) previous[k] = last_known(context, known[k]);
        threshold = optimal_threshold(estimate_change_fraction(known_states, previous));
      }
      for (PoiIndex poi : unknown) {
        std::optional<ProxyMatch> proxy;
        if (context.has_history()) {
          proxy = best_proxy(context.change(predictor.change_rule), poi, known);
        }
        if (proxy && proxy->score >= threshold) {
          const State proxy_now = static_cast<State>(current[proxy->proxy]);
          const State proxy_last = last_known(context, proxy->proxy);
          if (proxy_now != proxy_last && proxy_last == last_known(context, poi)) {
            result.predictions.push_back({poi, proxy_now, PredictionMode::Spatial});
            continue;
          }
        }
        result.predictions.push_back(temporal(poi));
      }
      break;
    }
    case PredictorKind::External: {
      if (!predictor.external) throw Error(ErrorCode::MaskMismatch, "no external predictions");
      for (PoiIndex poi : unknown) {
        auto state = predictor.external->get(context.cycle(), poi);
        if (!state) {
          throw Error(ErrorCode::MaskMismatch,
                      predictor.external->label() + " has no prediction for POI index " +
                          std::to_string(poi) + " at cycle " + std::to_string(context.cycle()));
        }
        result.predictions.push_back({poi, *state, PredictionMode::ProxyCopy});
      }
      break;
    }
  }
  return result;
}

PredictionResult predict(const Predictor& predictor, const Scenario& history,
                         const KnownMask& mask, std::span<const State> known_states) {
  return predict(predictor, PredictionContext(history, mask.cycle()), mask, known_states);
}

double estimate_change_fraction(std::span<const State> current, std::span<const State> previous) {
  if (current.size() != previous.size()) {
    throw Error(ErrorCode::LengthMismatch, "current/previous state lists differ in length");
  }
  if (current.empty()) throw Error(ErrorCode::EmptyKnownSet, "no known POIs");
  std::size_t changed = 0;
  for (std::size_t k = 0; k < current.size(); ++k) changed += current[k] != previous[k];
  return static_cast<double>(changed) / static_cast<double>(current.size());
}

double optimal_threshold(double change_fraction) {
  check_unit(change_fraction, "change fraction");
  return 1.0 - change_fraction;
}

MispredictionModel misprediction_model(double threshold, double fraction_up,
                                       double change_fraction) {
  check_unit(threshold, "L");
  check_unit(fraction_up, "M");
  check_unit(change_fraction, "F");
  const double L = threshold;
  const double F = change_fraction;
  // Probability the proxy and target disagreed last cycle.
  const double split = 2.0 * fraction_up * (1.0 - fraction_up);

  MispredictionModel m;
  m.threshold = L;
  m.fraction_up = fraction_up;
  m.change_fraction = F;
  m.spatial = (1.0 - L) * (1.0 - split) * (1.0 - L) / 2.0;
  m.temporal = (1.0 - L) * split * F + (1.0 - (1.0 - L)) * F;
  m.total = m.spatial + m.temporal;
  return m;
}

void write_predictions_csv(const PredictionResult& result, std::span<const std::string> ids,
                           const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "poi_id,cycle,predicted_state,mode_used\n";
  for (const auto& p : result.predictions) {
    out << ids[p.poi] << ',' << result.cycle << ',' << int{p.state} << ',' << to_string(p.mode)
        << '\n';
  }
  csv::finish_output(out, path);
}

std::shared_ptr<ExternalPredictions> read_predictions_csv(const std::filesystem::path& path,
                                                          const Scenario& scenario,
                                                          std::string label) {
  csv::Reader reader(path);
  reader.expect_header("poi_id,cycle,predicted_state,mode_used");
  auto table = std::make_shared<ExternalPredictions>(std::move(label), scenario.poi_count());
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(fields.size()));
    auto poi = scenario.find(fields[0]);
    if (!poi) reader.fail("unknown POI '" + fields[0] + "'");
    const auto cycle = csv::parse_int(fields[1], reader.line(), "cycle");
    const auto state = csv::parse_int(fields[2], reader.line(), "predicted_state");
    if (cycle < 1) reader.fail("cycle must be >= 1");
    if (state != 0 && state != 1) reader.fail("predicted_state must be 0 or 1");
    try {
      table->set(static_cast<std::size_t>(cycle), *poi, static_cast<State>(state));
    } catch (const Error& e) {
      reader.fail(e.what());
    }
  }
  return table;
}

}  // namespace blindspot
