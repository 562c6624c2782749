#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindspot/core_model.hpp"
#include "blindspot/correlation.hpp"
#include "blindspot/prediction.hpp"
#include "blindspot/selection.hpp"

namespace blindspot {

/// How the known set of a trial is chosen: uniformly at random (the
/// predictor has no say), or by a budgeted source-selection algorithm.
enum class SelectorKind { RandomMask, StaticGreedy, DynamicGreedy, RandomSelection };

std::string_view to_string(SelectorKind kind);
/// Accepts random-mask, static, dynamic, random-selection.
SelectorKind parse_selector(std::string_view name);

/// Default x-axis: 5% .. 50% in steps of 5%.
std::vector<double> default_fractions();

/// Labels of the reference pool for worst-case overage.
std::vector<std::string> default_baselines();

struct ExperimentSpec {
  Scenario scenario;
  std::vector<std::size_t> eval_cycles;
  std::vector<double> fractions = default_fractions();
  std::size_t trials = 50;
  /// Predictors run under RandomMask; external tables ride along here too.
  std::vector<Predictor> predictors;
  std::vector<SelectorKind> selectors = {SelectorKind::RandomMask};
  /// Graph metrics for the selection experiments. Kendall's Tau graphs are
  /// scored with BestProxyKT, change graphs with Hybrid.
  std::vector<CorrelationMetric> metrics = {CorrelationMetric::KendallTau,
                                            CorrelationMetric::ChangeCorrelation};
  double edge_threshold = kDefaultEdgeThreshold;
  double hybrid_threshold = kDefaultHybridThreshold;
  CreditStrategy strategy = CreditStrategy::MaxPredictor;
  std::uint64_t master_seed = 0;
  /// Labels forming the best-baseline pool for overage.
  std::vector<std::string> baselines = default_baselines();

  void validate() const;
};

struct CurvePoint {
  double fraction = 0.0;
  double mean_error = 0.0;
  /// Sample standard deviation over trials; 0 for a single trial.
  double std_error = 0.0;
  std::size_t trials = 0;
};

/// Error rate against known fraction for one algorithm on one cycle.
struct ExperimentCurve {
  std::string algorithm;
  SelectorKind selector = SelectorKind::RandomMask;
  std::size_t cycle = 0;
  std::vector<CurvePoint> points;
};

struct OverageRow {
  std::string algorithm;
  double fraction = 0.0;
  double worst_case_overage = 0.0;
};

using OverageReport = std::vector<OverageRow>;

/// Seed of trial `trial` at fraction index `fraction_index` on `cycle`;
/// `stream` separates masks (0), random predictions (1) and random
/// selections (2) within a trial.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t cycle,
                         std::size_t fraction_index, std::size_t trial, std::uint64_t stream);

/// Budget W = fraction * total cost, snapped to the nearest integer when
/// within rounding noise of it.
double budget_for_fraction(double fraction, std::span<const double> costs);

/// Mispredictions over the unknown POIs of `result`, divided by their
/// count; 0 when nothing was unknown.
double error_rate(const Scenario& truth, const PredictionResult& result);

double run_trial(const Scenario& scenario, std::size_t cycle, const Predictor& predictor,
                 const KnownMask& known);

double run_trial(const PredictionContext& context, const Scenario& truth,
                 const Predictor& predictor, const KnownMask& known);

std::vector<ExperimentCurve> run_experiment(const ExperimentSpec& spec);

/// Per algorithm and fraction, max over cycles of the algorithm's mean
/// error minus the best baseline mean error that cycle. Only RandomMask
/// curves take part. Throws ShapeMismatch when curves disagree on cycles
/// or fractions or a baseline is missing.
OverageReport worst_case_overage(std::span<const ExperimentCurve> curves,
                                 std::span<const std::string> baselines);

/// Reads the JSON experiment description used by `blindspot evaluate`.
/// External prediction paths are resolved against `base_dir`.
ExperimentSpec parse_experiment_spec(std::string_view json_text, Scenario scenario,
                                     const std::filesystem::path& base_dir);

/// `algorithm,cycle,fraction,mean_error,std_error,trials`
void write_results_csv(std::span<const ExperimentCurve> curves, const std::filesystem::path& path);

/// `algorithm,fraction,worst_case_overage`
void write_overage_csv(const OverageReport& report, const std::filesystem::path& path);

}  // namespace blindspot
