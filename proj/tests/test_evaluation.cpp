#include <gtest/gtest.h>

#include <random>

#include "blindspot/evaluation.hpp"
#include "blindspot/scenario.hpp"
#include "test_helpers.hpp"

using namespace blindspot;
using blindspot::testing::code_of;
using blindspot::testing::from_rows;

namespace {

/// Predictor that reads the answer from the trace itself.
Predictor truth_stub(const Scenario& s) {
  auto table = std::make_shared<ExternalPredictions>("Truth", s.poi_count());
  for (std::size_t t = 1; t <= s.cycle_count(); ++t) {
    for (PoiIndex i = 0; i < s.poi_count(); ++i) table->set(t, i, s.state(i, t));
  }
  return Predictor::from_external(table);
}

ExperimentCurve curve(std::string name, std::size_t cycle, std::vector<double> errors) {
  ExperimentCurve c{std::move(name), SelectorKind::RandomMask, cycle, {}};
  for (std::size_t k = 0; k < errors.size(); ++k) {
    c.points.push_back({0.05 * static_cast<double>(k + 1), errors[k], 0.0, 1});
  }
  return c;
}

std::vector<Predictor> standard_predictors() {
  return {Predictor::random(0), Predictor::last_known_state(), Predictor::majority(),
          Predictor::best_proxy_kt(), Predictor::hybrid()};
}

}  // namespace

TEST(RunTrial, Examples) {
  // cycle 2: POIs 1 and 3 changed, POI 0 known
  const auto s = from_rows({{1, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}});
  const KnownMask mask(5, 2, {0});
  EXPECT_DOUBLE_EQ(run_trial(s, 2, Predictor::last_known_state(), mask), 2.0 / 4.0);
  EXPECT_EQ(run_trial(s, 2, truth_stub(s), mask), 0.0);
  const KnownMask all(5, 2, {0, 1, 2, 3, 4});
  EXPECT_EQ(run_trial(s, 2, Predictor::random(3), all), 0.0);
  EXPECT_EQ(code_of([&] { run_trial(s, 1, Predictor::majority(), mask); }),
            ErrorCode::MaskMismatch);
}

TEST(RunTrial, LastKnownStateCountsChangedUnknowns) {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + gen() % 40;
    const auto s = blindspot::testing::random_scenario(gen, n, 4);
    const auto mask = mask_random(s, 3, 0.3, gen());
    std::size_t changed = 0;
    const auto unknown = mask.unknown();
    for (PoiIndex i : unknown) changed += s.state(i, 3) != s.state(i, 2);
    const double want =
        unknown.empty() ? 0.0 : static_cast<double>(changed) / static_cast<double>(unknown.size());
    ASSERT_EQ(run_trial(s, 3, Predictor::last_known_state(), mask), want);
  }
}

TEST(Budget, FractionOfTotalCost) {
  const std::vector<double> unit(100, 1.0);
  for (int k = 1; k <= 10; ++k) EXPECT_EQ(budget_for_fraction(k / 20.0, unit), 5.0 * k);
  const std::vector<double> mixed{1.5, 2.5};
  EXPECT_DOUBLE_EQ(budget_for_fraction(0.25, mixed), 1.0);
  EXPECT_DOUBLE_EQ(budget_for_fraction(0.3, mixed), 1.2);
}

TEST(Overage, Examples) {
  const std::vector<std::string> pool{"Base"};
  const std::vector<ExperimentCurve> two = {curve("Alg", 1, {0.10}), curve("Alg", 2, {0.20}),
                                            curve("Base", 1, {0.10}), curve("Base", 2, {0.15})};
  const auto report = worst_case_overage(two, pool);
  ASSERT_EQ(report.size(), 2u);
  EXPECT_EQ(report[0].algorithm, "Alg");
  EXPECT_NEAR(report[0].worst_case_overage, 0.05, 1e-15);
  EXPECT_EQ(report[1].algorithm, "Base");
  EXPECT_EQ(report[1].worst_case_overage, 0.0);

  const std::vector<ExperimentCurve> one = {curve("Alg", 4, {0.3, 0.1}),
                                            curve("Base", 4, {0.2, 0.2})};
  const auto single = worst_case_overage(one, pool);
  EXPECT_DOUBLE_EQ(single[0].worst_case_overage, 0.1);
  EXPECT_DOUBLE_EQ(single[1].worst_case_overage, -0.1);
}

TEST(Overage, BestBaselineIsPerCycle) {
  const std::vector<std::string> pool{"A", "B"};
  const std::vector<ExperimentCurve> curves = {curve("A", 1, {0.1}), curve("A", 2, {0.5}),
                                               curve("B", 1, {0.4}), curve("B", 2, {0.2}),
                                               curve("H", 1, {0.1}), curve("H", 2, {0.2})};
  for (const auto& row : worst_case_overage(curves, pool)) {
    if (row.algorithm == "H") EXPECT_EQ(row.worst_case_overage, 0.0);
  }
}

TEST(Overage, ShapeErrors) {
  const std::vector<std::string> pool{"Base"};
  const std::vector<ExperimentCurve> missing = {curve("Alg", 1, {0.1}), curve("Base", 1, {0.1}),
                                                curve("Base", 2, {0.1})};
  EXPECT_EQ(code_of([&] { worst_case_overage(missing, pool); }), ErrorCode::ShapeMismatch);
  const std::vector<ExperimentCurve> grid = {curve("Alg", 1, {0.1, 0.2}), curve("Base", 1, {0.1})};
  EXPECT_EQ(code_of([&] { worst_case_overage(grid, pool); }), ErrorCode::ShapeMismatch);
  const std::vector<ExperimentCurve> no_base = {curve("Alg", 1, {0.1})};
  EXPECT_EQ(code_of([&] { worst_case_overage(no_base, pool); }), ErrorCode::ShapeMismatch);
}

TEST(Experiment, TruthStubIsTheFloor) {
  GeneratorConfig c;
  c.n_pois = 40;
  c.n_clusters = 4;
  const auto s = generate(c);
  ExperimentSpec spec;
  spec.scenario = s;
  spec.eval_cycles = {2, 6};
  spec.trials = 5;
  spec.predictors = standard_predictors();
  spec.predictors.push_back(truth_stub(s));
  const auto curves = run_experiment(spec);
  ASSERT_EQ(curves.size(), 12u);
  for (const auto& curve : curves) {
    ASSERT_EQ(curve.points.size(), 10u);
    for (const auto& p : curve.points) {
      ASSERT_EQ(p.trials, 5u);
      ASSERT_GE(p.mean_error, 0.0);
      ASSERT_LE(p.mean_error, 1.0);
      if (curve.algorithm == "Truth") ASSERT_EQ(p.mean_error, 0.0);
    }
  }
}

TEST(Experiment, RandomPredictorNearHalf) {
  std::mt19937_64 gen(32);
  ExperimentSpec spec;
  spec.scenario = blindspot::testing::random_scenario(gen, 200, 3);
  spec.eval_cycles = {3};
  spec.fractions = {0.1, 0.5};
  spec.predictors = {Predictor::random(0)};
  const auto curves = run_experiment(spec);
  for (const auto& p : curves.front().points) EXPECT_NEAR(p.mean_error, 0.5, 0.05);
}

TEST(Experiment, DeterministicAndSelectorCurvesLabelled) {
  GeneratorConfig c;
  c.n_pois = 30;
  c.n_clusters = 3;
  c.seed = 4;
  ExperimentSpec spec;
  spec.scenario = generate(c);
  spec.eval_cycles = {1, 7};
  spec.trials = 3;
  spec.predictors = standard_predictors();
  spec.selectors = {SelectorKind::RandomMask, SelectorKind::StaticGreedy,
                    SelectorKind::DynamicGreedy, SelectorKind::RandomSelection};
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec);
  const auto dir = blindspot::testing::scratch_dir();
  write_results_csv(a, dir / "a.csv");
  write_results_csv(b, dir / "b.csv");
  EXPECT_EQ(blindspot::testing::read_file(dir / "a.csv"), blindspot::testing::read_file(dir / "b.csv"));

  std::set<std::string> labels;
  for (const auto& curve : a) {
    labels.insert(curve.algorithm);
    const bool deterministic = curve.selector == SelectorKind::StaticGreedy ||
                               curve.selector == SelectorKind::DynamicGreedy;
    for (const auto& p : curve.points) EXPECT_EQ(p.trials, deterministic ? 1u : 3u);
  }
  for (const char* want : {"StaticGreedy/BestProxyKT", "StaticGreedy/Hybrid",
                           "DynamicGreedy/BestProxyKT", "DynamicGreedy/Hybrid",
                           "RandomSelection/Hybrid", "Hybrid", "Majority"}) {
    EXPECT_TRUE(labels.count(want)) << want;
  }
  const auto overage = worst_case_overage(a, spec.baselines);
  EXPECT_EQ(overage.size(), 5u * 10u);
}

TEST(Experiment, SpecValidation) {
  ExperimentSpec spec;
  spec.scenario = from_rows({{1, 0}});
  spec.predictors = {Predictor::majority()};
  spec.eval_cycles = {3};
  EXPECT_EQ(code_of([&] { run_experiment(spec); }), ErrorCode::InvalidCycle);
  spec.eval_cycles = {2};
  spec.fractions = {0.0};
  EXPECT_EQ(code_of([&] { run_experiment(spec); }), ErrorCode::InvalidFraction);
  spec.fractions = {0.5};
  spec.trials = 0;
  EXPECT_EQ(code_of([&] { run_experiment(spec); }), ErrorCode::InvalidConfig);
}

TEST(ExperimentJson, ParsesAndAddsExternalBaselines) {
  const auto dir = blindspot::testing::scratch_dir();
  const auto s = from_rows({{1, 0, 1}, {0, 0, 1}});
  blindspot::testing::write_file(
      dir / "ext.csv",
      "poi_id,cycle,predicted_state,mode_used\ns0,2,0,arima\ns1,2,0,arima\n");
  const auto spec = parse_experiment_spec(
      R"({"eval_cycles": [2], "trials": 2, "predictors": ["hybrid", "last"],
          "external": [{"label": "ARIMA", "path": "ext.csv"}], "master_seed": 5})",
      s, dir);
  EXPECT_EQ(spec.eval_cycles, (std::vector<std::size_t>{2}));
  EXPECT_EQ(spec.trials, 2u);
  EXPECT_EQ(spec.master_seed, 5u);
  ASSERT_EQ(spec.predictors.size(), 3u);
  EXPECT_EQ(spec.predictors[2].label(), "ARIMA");
  EXPECT_EQ(spec.baselines.back(), "ARIMA");

  const auto defaults = parse_experiment_spec("{}", s, dir);
  EXPECT_EQ(defaults.eval_cycles, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(defaults.predictors.size(), 5u);
  EXPECT_EQ(code_of([&] { parse_experiment_spec(R"({"trails": 3})", s, dir); }),
            ErrorCode::InvalidConfig);
}
