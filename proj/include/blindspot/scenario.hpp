#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blindspot/core_model.hpp"

namespace blindspot {

/// Synthetic disaster trace parameters. POIs are split into contiguous
/// clusters that share outages (common supplier or power feed).
struct GeneratorConfig {
  std::size_t n_pois = 100;
  std::size_t n_cycles = 10;
  std::size_t n_clusters = 10;
  /// Probability a POI follows its cluster in a given cycle.
  double intra_cluster_agreement = 1.0;
  /// Per-cluster flip probability on an ordinary cycle.
  double calm_change_rate = 0.02;
  /// 1-based cycles on which clusters flip with shock_change_rate instead.
  std::vector<std::size_t> shock_cycles = {6};
  double shock_change_rate = 0.3;
  /// Share of changes that are recoveries (0 -> 1) at the last cycle. The
  /// share is 0.5 for the first two thirds of the horizon and ramps
  /// linearly to this value over the final third.
  double recovery_bias = 0.9;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

/// Parses a JSON object whose keys are exactly the field names above;
/// absent keys keep their defaults, unknown keys are rejected.
GeneratorConfig parse_generator_config(std::string_view json_text);
GeneratorConfig read_generator_config(const std::filesystem::path& path);

Scenario generate(const GeneratorConfig& config);

/// Cluster of each POI in a generated scenario.
std::size_t cluster_of(const GeneratorConfig& config, PoiIndex poi);

/// Trace CSV `poi_id,cycle,state` plus optional metadata `poi_id,cost,value`.
/// Without metadata, costs and values default to 1.0.
Scenario load_csv(const std::filesystem::path& trace,
                  const std::optional<std::filesystem::path>& metadata = std::nullopt);

void save_csv(const Scenario& scenario, const std::filesystem::path& trace,
              const std::optional<std::filesystem::path>& metadata = std::nullopt);

struct PoiMetadata {
  std::vector<std::string> ids;
  std::vector<double> costs;
  std::vector<double> values;
};

PoiMetadata read_metadata_csv(const std::filesystem::path& path);
void write_metadata_csv(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace blindspot
