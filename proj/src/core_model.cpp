#include "blindspot/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidCycle: return "InvalidCycle";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidHorizon: return "InvalidHorizon";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::MissingHistory: return "MissingHistory";
    case ErrorCode::MaskMismatch: return "MaskMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyKnownSet: return "EmptyKnownSet";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::TooManyNodes: return "TooManyNodes";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

Scenario::Scenario(std::vector<std::string> ids, std::vector<StateSeries> series,
                   std::vector<double> costs, std::vector<double> values)
    : ids_(std::move(ids)),
      series_(std::move(series)),
      costs_(std::move(costs)),
      values_(std::move(values)) {
  if (ids_.empty()) throw Error(ErrorCode::MissingCell, "scenario has no POIs");
  if (series_.size() != ids_.size()) {
    throw Error(ErrorCode::MissingCell, "series count does not match POI count");
  }
  if (costs_.empty()) costs_.assign(ids_.size(), 1.0);
  if (values_.empty()) values_.assign(ids_.size(), 1.0);
  if (costs_.size() != ids_.size() || values_.size() != ids_.size()) {
    throw Error(ErrorCode::InvalidConfig, "costs/values must cover every POI");
  }
  cycles_ = series_.front().size();
  if (cycles_ == 0) throw Error(ErrorCode::EmptySeries, "scenario has no cycles");

  for (PoiIndex i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::DuplicateRecord, "duplicate POI id '" + ids_[i] + "'");
    }
    if (series_[i].size() != cycles_) {
      throw Error(ErrorCode::MissingCell, "series of '" + ids_[i] + "' has wrong length");
    }
    for (State s : series_[i]) {
      if (s > 1) throw Error(ErrorCode::InvalidState, "non-binary state in '" + ids_[i] + "'");
    }
    if (!(costs_[i] > 0.0) || !std::isfinite(costs_[i])) {
      throw Error(ErrorCode::InvalidConfig, "cost of '" + ids_[i] + "' must be positive");
    }
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
      throw Error(ErrorCode::InvalidConfig, "value of '" + ids_[i] + "' must be nonnegative");
    }
  }
}

std::optional<PoiIndex> Scenario::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

State Scenario::state(PoiIndex poi, std::size_t cycle) const {
  if (cycle == 0) return kPreDisasterState;
  if (cycle > cycles_) {
    throw Error(ErrorCode::InvalidCycle, "cycle " + std::to_string(cycle) + " beyond trace");
  }
  return series_.at(poi)[cycle - 1];
}

Scenario scenario_from_records(std::span<const Record> records,
                               const std::map<std::string, double>& costs,
                               const std::map<std::string, double>& values) {
  std::vector<std::string> ids;
  std::unordered_map<std::string, PoiIndex> index;
  std::size_t cycles = 0;
  for (const auto& r : records) {
    if (r.state != 0 && r.state != 1) {
      throw Error(ErrorCode::InvalidState, "state " + std::to_string(r.state) + " for '" +
                                               r.poi + "' at cycle " + std::to_string(r.cycle));
    }
    if (r.cycle == 0) {
      throw Error(ErrorCode::InvalidCycle, "cycles are 1-based; got 0 for '" + r.poi + "'");
    }
    if (index.emplace(r.poi, ids.size()).second) ids.push_back(r.poi);
    cycles = std::max(cycles, r.cycle);
  }
  if (ids.empty()) throw Error(ErrorCode::MissingCell, "no records");

  constexpr State kUnset = 0xff;
  std::vector<StateSeries> series(ids.size(), StateSeries(cycles, kUnset));
  for (const auto& r : records) {
    State& cell = series[index.at(r.poi)][r.cycle - 1];
    if (cell != kUnset) {
      throw Error(ErrorCode::DuplicateRecord,
                  "duplicate record ('" + r.poi + "', " + std::to_string(r.cycle) + ")");
    }
    cell = static_cast<State>(r.state);
  }
  for (PoiIndex i = 0; i < ids.size(); ++i) {
    for (std::size_t c = 0; c < cycles; ++c) {
      if (series[i][c] == kUnset) {
        throw Error(ErrorCode::MissingCell,
                    "missing record ('" + ids[i] + "', " + std::to_string(c + 1) + ")");
      }
    }
  }

  auto lookup = [&](const std::map<std::string, double>& table, const char* what) {
    std::vector<double> out(ids.size(), 1.0);
    for (const auto& [id, v] : table) {
      auto it = index.find(id);
      if (it == index.end()) {
        throw Error(ErrorCode::InvalidConfig,
                    std::string(what) + " given for unknown POI '" + id + "'");
      }
      out[it->second] = v;
    }
    return out;
  };
  auto cost_vec = lookup(costs, "cost");
  auto value_vec = lookup(values, "value");
  return Scenario(std::move(ids), std::move(series), std::move(cost_vec), std::move(value_vec));
}

ChangeSeries change_series(std::span<const State> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "change_series of empty series");
  ChangeSeries out(series.size());
  State prev = kPreDisasterState;
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i] = static_cast<Delta>(static_cast<int>(series[i]) - static_cast<int>(prev));
    prev = series[i];
  }
  return out;
}

KnownMask::KnownMask(std::size_t poi_count, std::size_t cycle, std::vector<PoiIndex> known)
    : cycle_(cycle), known_(std::move(known)), flags_(poi_count, false) {
  if (cycle_ == 0) throw Error(ErrorCode::InvalidCycle, "mask cycle must be >= 1");
  std::sort(known_.begin(), known_.end());
  for (std::size_t k = 0; k < known_.size(); ++k) {
    if (known_[k] >= poi_count) {
      throw Error(ErrorCode::MaskMismatch, "known POI index out of range");
    }
    if (k > 0 && known_[k] == known_[k - 1]) {
      throw Error(ErrorCode::MaskMismatch, "known POI listed twice");
    }
    flags_[known_[k]] = true;
  }
}

std::vector<PoiIndex> KnownMask::unknown() const {
  std::vector<PoiIndex> out;
  out.reserve(flags_.size() - known_.size());
  for (PoiIndex i = 0; i < flags_.size(); ++i) {
    if (!flags_[i]) out.push_back(i);
  }
  return out;
}

std::size_t known_count(double fraction, std::size_t poi_count) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidFraction, "fraction must be in (0, 1]");
  }
  // The epsilon keeps exact halves such as 0.15 * 10 on the upper side.
  auto count = static_cast<std::size_t>(std::floor(fraction * poi_count + 0.5 + 1e-9));
  return std::clamp<std::size_t>(count, 1, poi_count);
}

KnownMask mask_random(const Scenario& scenario, std::size_t cycle, double fraction,
                      std::uint64_t seed) {
  if (cycle == 0 || cycle > scenario.cycle_count()) {
    throw Error(ErrorCode::InvalidCycle, "cycle " + std::to_string(cycle) + " out of range");
  }
  const std::size_t n = scenario.poi_count();
  const std::size_t k = known_count(fraction, n);
  std::vector<PoiIndex> order(n);
  std::iota(order.begin(), order.end(), PoiIndex{0});
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng.below(n - i)]);
  }
  order.resize(k);
  return KnownMask(n, cycle, std::move(order));
}

}  // namespace blindspot
