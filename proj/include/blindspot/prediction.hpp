#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindspot/core_model.hpp"
#include "blindspot/correlation.hpp"

namespace blindspot {

enum class PredictorKind { Random, LastKnownState, Majority, BestProxyKT, Hybrid, External };

enum class PredictionMode { Spatial, Temporal, MajorityVote, RandomGuess, ProxyCopy };

std::string_view to_string(PredictionMode mode);

/// Predictions produced outside this library (e.g. a time-series model),
/// keyed by cycle and POI. Scored like any other predictor.
class ExternalPredictions {
 public:
  ExternalPredictions(std::string label, std::size_t poi_count)
      : label_(std::move(label)), poi_count_(poi_count) {}

  void set(std::size_t cycle, PoiIndex poi, State state);
  std::optional<State> get(std::size_t cycle, PoiIndex poi) const;
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
  std::size_t poi_count_;
  std::map<std::size_t, std::vector<std::optional<State>>> by_cycle_;
};

inline constexpr double kDefaultHybridThreshold = 0.5;

struct Predictor {
  PredictorKind kind = PredictorKind::LastKnownState;
  /// Hybrid switching threshold L.
  double threshold = kDefaultHybridThreshold;
  /// Hybrid only: use L = 1 - F with F estimated from this cycle's reports.
  bool adaptive = false;
  ChangeRule change_rule = ChangeRule::Restricted;
  /// BestProxyKT only: Kendall's Tau edges below this are pruned.
  double edge_threshold = kDefaultEdgeThreshold;
  /// Random only.
  std::uint64_t seed = 0;
  std::shared_ptr<const ExternalPredictions> external;

  static Predictor random(std::uint64_t seed);
  static Predictor last_known_state();
  static Predictor majority();
  static Predictor best_proxy_kt(double edge_threshold = kDefaultEdgeThreshold);
  static Predictor hybrid(double threshold = kDefaultHybridThreshold);
  static Predictor hybrid_adaptive();
  static Predictor from_external(std::shared_ptr<const ExternalPredictions> table);

  /// Display label, e.g. "Hybrid" or "LastKnownState".
  std::string label() const;
};

/// Parses CLI/JSON names: random, last, majority, bestproxy, hybrid,
/// hybrid-adaptive.
Predictor parse_predictor(std::string_view name);

struct Prediction {
  PoiIndex poi = 0;
  State state = 0;
  PredictionMode mode = PredictionMode::Temporal;

  bool operator==(const Prediction&) const = default;
};

/// One entry per unknown POI of the mask, ascending index.
struct PredictionResult {
  std::size_t cycle = 0;
  std::vector<Prediction> predictions;

  bool operator==(const PredictionResult&) const = default;
};

/// Everything the predictors read about the past when predicting `cycle`:
/// last states x_{n-1} and the pairwise scores over cycles 1..n-1. Only
/// cycles before `cycle` of the scenario are ever consulted. Immutable.
class PredictionContext {
 public:
  /// Throws MissingHistory if the scenario lacks cycles 1..cycle-1.
  PredictionContext(const Scenario& history, std::size_t cycle);

  std::size_t cycle() const noexcept { return cycle_; }
  std::size_t poi_count() const noexcept { return last_.size(); }
  std::span<const State> last_states() const noexcept { return last_; }

  /// False on cycle 1, where only the pre-disaster state is known.
  bool has_history() const noexcept { return cycle_ > 1; }

  const PairwiseScores& kendall() const { return kendall_; }
  const PairwiseScores& change(ChangeRule rule) const {
    return rule == ChangeRule::Restricted ? change_ : change_literal_;
  }

 private:
  std::size_t cycle_;
  std::vector<State> last_;
  PairwiseScores kendall_;
  PairwiseScores change_;
  PairwiseScores change_literal_;
};

/// `known_states[k]` is the reported state of mask.known()[k] at the mask's
/// cycle.
PredictionResult predict(const Predictor& predictor, const PredictionContext& context,
                         const KnownMask& mask, std::span<const State> known_states);

PredictionResult predict(const Predictor& predictor, const Scenario& history,
                         const KnownMask& mask, std::span<const State> known_states);

/// Fraction of reported POIs whose state differs from the previous cycle.
/// `current[k]` and `previous[k]` refer to the same POI.
double estimate_change_fraction(std::span<const State> current, std::span<const State> previous);

/// Threshold minimising the misprediction model: L = 1 - F.
double optimal_threshold(double change_fraction);

struct MispredictionModel {
  double threshold = 0.0;        // L
  double fraction_up = 0.0;      // M, share of POIs at state 1 last cycle
  double change_fraction = 0.0;  // F
  double spatial = 0.0;          // P_sm
  double temporal = 0.0;         // P_tm
  double total = 0.0;            // P_m = P_sm + P_tm
};

MispredictionModel misprediction_model(double threshold, double fraction_up,
                                       double change_fraction);

void write_predictions_csv(const PredictionResult& result, std::span<const std::string> ids,
                           const std::filesystem::path& path);

/// Reads `poi_id,cycle,predicted_state,mode_used`; mode_used is free text.
std::shared_ptr<ExternalPredictions> read_predictions_csv(const std::filesystem::path& path,
                                                          const Scenario& scenario,
                                                          std::string label);

}  // namespace blindspot
