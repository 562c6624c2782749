#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace blindspot {

/// Dense POI index, contiguous 0..n-1 within a Scenario. Lower index wins
/// every tie-break in the library.
using PoiIndex = std::size_t;

/// Binary availability: 1 = open/available, 0 = out.
using State = std::uint8_t;

/// Per-cycle change dx_i = x_i - x_{i-1}, one of -1, 0, +1.
using Delta = std::int8_t;

/// States x_1..x_t of one POI. Cycles are 1-based; cycle 0 is the implicit
/// pre-disaster state, which is always 1.
using StateSeries = std::vector<State>;
using ChangeSeries = std::vector<Delta>;

inline constexpr State kPreDisasterState = 1;

struct Record {
  std::string poi;
  std::size_t cycle = 0;
  int state = 0;
};

/// Ground-truth POI x cycle matrix plus per-POI cost and importance value.
/// Immutable once constructed.
class Scenario {
 public:
  Scenario() = default;

  /// Validates: equal nonzero series lengths, binary states, unique ids,
  /// costs > 0, values >= 0. Empty cost/value vectors default to 1.0.
  Scenario(std::vector<std::string> ids, std::vector<StateSeries> series,
           std::vector<double> costs = {}, std::vector<double> values = {});

  std::size_t poi_count() const noexcept { return ids_.size(); }
  std::size_t cycle_count() const noexcept { return cycles_; }

  std::span<const std::string> ids() const noexcept { return ids_; }
  const std::string& id(PoiIndex poi) const { return ids_.at(poi); }
  std::optional<PoiIndex> find(std::string_view id) const;

  const StateSeries& series(PoiIndex poi) const { return series_.at(poi); }

  /// State at a 1-based cycle; cycle 0 yields the pre-disaster state.
  State state(PoiIndex poi, std::size_t cycle) const;

  double cost(PoiIndex poi) const { return costs_.at(poi); }
  double value(PoiIndex poi) const { return values_.at(poi); }
  std::span<const double> costs() const noexcept { return costs_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Scenario& other) const {
    return ids_ == other.ids_ && series_ == other.series_ && costs_ == other.costs_ &&
           values_ == other.values_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<StateSeries> series_;
  std::vector<double> costs_;
  std::vector<double> values_;
  std::unordered_map<std::string, PoiIndex> index_;
  std::size_t cycles_ = 0;
};

/// Builds a Scenario from long-form (poi, cycle, state) records. POIs are
/// indexed in order of first appearance; cycles must cover 1..max exactly.
/// Missing cost/value entries default to 1.0.
Scenario scenario_from_records(std::span<const Record> records,
                               const std::map<std::string, double>& costs = {},
                               const std::map<std::string, double>& values = {});

/// dx_i = x_i - x_{i-1} with x_0 = 1.
ChangeSeries change_series(std::span<const State> series);

/// Set of POIs whose state at `cycle` is revealed to the predictor.
class KnownMask {
 public:
  KnownMask() = default;
  KnownMask(std::size_t poi_count, std::size_t cycle, std::vector<PoiIndex> known);

  std::size_t cycle() const noexcept { return cycle_; }
  std::size_t poi_count() const noexcept { return flags_.size(); }

  /// Known POIs in ascending index order.
  std::span<const PoiIndex> known() const noexcept { return known_; }
  std::vector<PoiIndex> unknown() const;
  bool contains(PoiIndex poi) const { return flags_.at(poi); }

  bool operator==(const KnownMask&) const = default;

 private:
  std::size_t cycle_ = 0;
  std::vector<PoiIndex> known_;
  std::vector<bool> flags_;
};

/// round(fraction * n), half-up, never below 1 and never above n.
std::size_t known_count(double fraction, std::size_t poi_count);

/// Uniform sample without replacement of known_count(fraction, n) POIs.
KnownMask mask_random(const Scenario& scenario, std::size_t cycle, double fraction,
                      std::uint64_t seed);

}  // namespace blindspot
