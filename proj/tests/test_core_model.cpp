#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "blindspot/core_model.hpp"
#include "blindspot/error.hpp"

using namespace blindspot;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Usage;
}

Scenario flat(std::size_t n, std::size_t cycles) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "s" + std::to_string(i);
  return Scenario(ids, std::vector<StateSeries>(n, StateSeries(cycles, 1)));
}

}  // namespace

TEST(ScenarioFromRecords, FullRectangleOfOnes) {
  std::vector<Record> records;
  for (const char* poi : {"a", "b"}) {
    for (std::size_t c = 1; c <= 3; ++c) records.push_back({poi, c, 1});
  }
  const auto s = scenario_from_records(records);
  EXPECT_EQ(s.poi_count(), 2u);
  EXPECT_EQ(s.cycle_count(), 3u);
  EXPECT_EQ(s.series(0), (StateSeries{1, 1, 1}));
  EXPECT_EQ(s.series(1), (StateSeries{1, 1, 1}));
  EXPECT_EQ(s.cost(0), 1.0);
  EXPECT_EQ(s.value(1), 1.0);
  EXPECT_EQ(s.state(0, 0), 1);  // pre-disaster
}

TEST(ScenarioFromRecords, Errors) {
  std::vector<Record> missing = {{"a", 1, 1}, {"a", 2, 1}, {"b", 1, 0}};
  EXPECT_EQ(code_of([&] { scenario_from_records(missing); }), ErrorCode::MissingCell);

  std::vector<Record> bad_state = {{"a", 0, 2}};
  EXPECT_EQ(code_of([&] { scenario_from_records(bad_state); }), ErrorCode::InvalidState);

  std::vector<Record> dup = {{"a", 1, 1}, {"a", 1, 0}};
  EXPECT_EQ(code_of([&] { scenario_from_records(dup); }), ErrorCode::DuplicateRecord);

  std::vector<Record> zero_cycle = {{"a", 0, 1}};
  EXPECT_EQ(code_of([&] { scenario_from_records(zero_cycle); }), ErrorCode::InvalidCycle);
}

TEST(ScenarioFromRecords, MetadataAppliedAndOrderKept) {
  std::vector<Record> records = {{"z", 1, 0}, {"a", 1, 1}};
  const auto s = scenario_from_records(records, {{"a", 2.5}}, {{"z", 0.0}});
  EXPECT_EQ(s.id(0), "z");
  EXPECT_EQ(s.id(1), "a");
  EXPECT_EQ(s.cost(1), 2.5);
  EXPECT_EQ(s.cost(0), 1.0);
  EXPECT_EQ(s.value(0), 0.0);
  EXPECT_EQ(code_of([&] { scenario_from_records(records, {{"a", 0.0}}); }),
            ErrorCode::InvalidConfig);
}

TEST(ChangeSeries, HandEvaluated) {
  EXPECT_EQ(change_series(StateSeries{1, 1, 1}), (ChangeSeries{0, 0, 0}));
  EXPECT_EQ(change_series(StateSeries{0, 0, 1}), (ChangeSeries{-1, 0, 1}));
  EXPECT_EQ(change_series(StateSeries{1, 0, 0, 1}), (ChangeSeries{0, -1, 0, 1}));
  EXPECT_EQ(code_of([] { change_series(StateSeries{}); }), ErrorCode::EmptySeries);
}

TEST(ChangeSeries, PartialSumsReconstructSeries) {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 500; ++rep) {
    StateSeries s(1 + gen() % 40);
    for (auto& x : s) x = gen() & 1U;
    const auto d = change_series(s);
    int level = 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
      level += d[i];
      ASSERT_EQ(level, s[i]);
    }
  }
}

TEST(MaskRandom, FullRevealAndCardinality) {
  const auto s = flat(10, 3);
  const auto all = mask_random(s, 1, 1.0, 3);
  EXPECT_EQ(all.known().size(), 10u);
  EXPECT_TRUE(all.unknown().empty());
  EXPECT_EQ(mask_random(s, 2, 0.5, 3).known().size(), 5u);
}

TEST(MaskRandom, CardinalityOnFractionGrid) {
  for (std::size_t n : {1u, 7u, 10u, 33u, 100u, 101u}) {
    const auto s = flat(n, 2);
    for (int k = 1; k <= 20; ++k) {
      // round-half-up of k*n/20 in integer arithmetic, floor at 1
      const std::size_t expected = std::max<std::size_t>(1, (2 * k * n + 20) / 40);
      const auto mask = mask_random(s, 1, k * 0.05, 11);
      ASSERT_EQ(mask.known().size(), expected) << "n=" << n << " k=" << k;
    }
  }
}

TEST(MaskRandom, DeterministicPerSeedAndRoughlyUniform) {
  const auto s = flat(20, 2);
  EXPECT_EQ(mask_random(s, 1, 0.3, 99), mask_random(s, 1, 0.3, 99));
  EXPECT_NE(mask_random(s, 1, 0.3, 99), mask_random(s, 1, 0.3, 100));

  std::vector<int> hits(20, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    const auto mask = mask_random(s, 1, 0.25, seed);
    for (auto p : mask.known()) ++hits[p];
  }
  // each POI expected 1000 times
  for (int h : hits) EXPECT_NEAR(h, 1000, 120);
}

TEST(MaskRandom, Errors) {
  const auto s = flat(5, 2);
  EXPECT_EQ(code_of([&] { mask_random(s, 1, 0.0, 1); }), ErrorCode::InvalidFraction);
  EXPECT_EQ(code_of([&] { mask_random(s, 1, 1.5, 1); }), ErrorCode::InvalidFraction);
  EXPECT_EQ(code_of([&] { mask_random(s, 0, 0.5, 1); }), ErrorCode::InvalidCycle);
  EXPECT_EQ(code_of([&] { mask_random(s, 3, 0.5, 1); }), ErrorCode::InvalidCycle);
}

TEST(KnownMask, RejectsBadIndices) {
  EXPECT_EQ(code_of([] { KnownMask(3, 1, {0, 3}); }), ErrorCode::MaskMismatch);
  EXPECT_EQ(code_of([] { KnownMask(3, 1, {1, 1}); }), ErrorCode::MaskMismatch);
  const KnownMask m(4, 2, {3, 1});
  EXPECT_EQ(std::vector<PoiIndex>(m.known().begin(), m.known().end()), (std::vector<PoiIndex>{1, 3}));
  EXPECT_EQ(m.unknown(), (std::vector<PoiIndex>{0, 2}));
}
