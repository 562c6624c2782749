#include "blindspot/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

namespace {

void check_rate(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be in [0, 1]");
  }
}

/// Recovery share of changes at `cycle`.
double recovery_share(const GeneratorConfig& config, std::size_t cycle) {
  if (config.n_cycles <= 1) return config.recovery_bias;
  const double progress =
      static_cast<double>(cycle - 1) / static_cast<double>(config.n_cycles - 1);
  constexpr double kRampStart = 2.0 / 3.0;
  if (progress <= kRampStart) return 0.5;
  return 0.5 + (config.recovery_bias - 0.5) * (progress - kRampStart) / (1.0 - kRampStart);
}

/// Flip probability for something currently in `state`, such that at a
/// recovery share of 0.5 both directions flip at `rate`.
double flip_probability(State state, double rate, double recovery) {
  const double p = state == 1 ? 2.0 * rate * (1.0 - recovery) : 2.0 * rate * recovery;
  return std::min(p, 1.0);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (n_pois == 0) throw Error(ErrorCode::InvalidConfig, "n_pois must be >= 1");
  if (n_cycles == 0) throw Error(ErrorCode::InvalidConfig, "n_cycles must be >= 1");
  if (n_clusters == 0 || n_clusters > n_pois) {
    throw Error(ErrorCode::InvalidConfig, "n_clusters must be in 1..n_pois");
  }
  check_rate(intra_cluster_agreement, "intra_cluster_agreement");
  check_rate(calm_change_rate, "calm_change_rate");
  check_rate(shock_change_rate, "shock_change_rate");
  check_rate(recovery_bias, "recovery_bias");
  for (auto c : shock_cycles) {
    if (c == 0 || c > n_cycles) {
      throw Error(ErrorCode::InvalidConfig, "shock cycle " + std::to_string(c) + " outside 1.." +
                                                std::to_string(n_cycles));
    }
  }
}

GeneratorConfig parse_generator_config(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("generator config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "generator config must be an object");

  static const std::set<std::string> known = {
      "n_pois",         "n_cycles",          "n_clusters",    "intra_cluster_agreement",
      "calm_change_rate", "shock_cycles",    "shock_change_rate", "recovery_bias",
      "seed"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown config field '" + key + "'");
  }

  GeneratorConfig c;
  try {
    c.n_pois = doc.value("n_pois", c.n_pois);
    c.n_cycles = doc.value("n_cycles", c.n_cycles);
    c.n_clusters = doc.value("n_clusters", c.n_clusters);
    c.intra_cluster_agreement = doc.value("intra_cluster_agreement", c.intra_cluster_agreement);
    c.calm_change_rate = doc.value("calm_change_rate", c.calm_change_rate);
    c.shock_cycles = doc.value("shock_cycles", c.shock_cycles);
    c.shock_change_rate = doc.value("shock_change_rate", c.shock_change_rate);
    c.recovery_bias = doc.value("recovery_bias", c.recovery_bias);
    c.seed = doc.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("generator config: ") + e.what());
  }
  c.validate();
  return c;
}

GeneratorConfig read_generator_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path.string() + ": cannot open for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_generator_config(buffer.str());
}

std::size_t cluster_of(const GeneratorConfig& config, PoiIndex poi) {
  return poi * config.n_clusters / config.n_pois;
}

Scenario generate(const GeneratorConfig& config) {
  config.validate();
  const std::size_t n = config.n_pois;
  const std::set<std::size_t> shocks(config.shock_cycles.begin(), config.shock_cycles.end());

  Rng rng(config.seed);
  std::vector<State> cluster_state(config.n_clusters, kPreDisasterState);
  std::vector<bool> cluster_changed(config.n_clusters, false);
  std::vector<State> poi_state(n, kPreDisasterState);
  std::vector<StateSeries> series(n, StateSeries(config.n_cycles));

  for (std::size_t cycle = 1; cycle <= config.n_cycles; ++cycle) {
    const double recovery = recovery_share(config, cycle);
    const double cluster_rate =
        shocks.count(cycle) ? config.shock_change_rate : config.calm_change_rate;
    for (std::size_t k = 0; k < config.n_clusters; ++k) {
      cluster_changed[k] = rng.bernoulli(flip_probability(cluster_state[k], cluster_rate, recovery));
      if (cluster_changed[k]) cluster_state[k] ^= 1U;
    }
    for (PoiIndex i = 0; i < n; ++i) {
      const std::size_t k = cluster_of(config, i);
      if (rng.bernoulli(config.intra_cluster_agreement)) {
        if (cluster_changed[k]) poi_state[i] = cluster_state[k];
      } else if (rng.bernoulli(
                     flip_probability(poi_state[i], config.calm_change_rate, recovery))) {
        poi_state[i] ^= 1U;
      }
      series[i][cycle - 1] = poi_state[i];
    }
  }

  const int width = static_cast<int>(std::to_string(n - 1).size());
  std::vector<std::string> ids(n);
  for (PoiIndex i = 0; i < n; ++i) {
    std::string digits = std::to_string(i);
    ids[i] = "p" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
  }
  return Scenario(std::move(ids), std::move(series));
}

PoiMetadata read_metadata_csv(const std::filesystem::path& path) {
  csv::Reader reader(path);
  reader.expect_header("poi_id,cost,value");
  PoiMetadata meta;
  std::set<std::string> seen;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(fields.size()));
    if (!seen.insert(fields[0]).second) reader.fail("duplicate POI '" + fields[0] + "'");
    const double cost = csv::parse_double(fields[1], reader.line(), "cost");
    const double value = csv::parse_double(fields[2], reader.line(), "value");
    if (!(cost > 0.0)) reader.fail("cost must be > 0");
    if (!(value >= 0.0)) reader.fail("value must be >= 0");
    meta.ids.push_back(fields[0]);
    meta.costs.push_back(cost);
    meta.values.push_back(value);
  }
  return meta;
}

void write_metadata_csv(const Scenario& scenario, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "poi_id,cost,value\n";
  for (PoiIndex i = 0; i < scenario.poi_count(); ++i) {
    out << scenario.id(i) << ',' << csv::format_double(scenario.cost(i)) << ','
        << csv::format_double(scenario.value(i)) << '\n';
  }
  csv::finish_output(out, path);
}

Scenario load_csv(const std::filesystem::path& trace,
                  const std::optional<std::filesystem::path>& metadata) {
  csv::Reader reader(trace);
  reader.expect_header("poi_id,cycle,state");
  std::vector<Record> records;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) reader.fail("empty poi_id");
    const auto cycle = csv::parse_int(fields[1], reader.line(), "cycle");
    const auto state = csv::parse_int(fields[2], reader.line(), "state");
    if (cycle < 1) reader.fail("cycle must be >= 1, got " + fields[1]);
    if (state != 0 && state != 1) reader.fail("state must be 0 or 1, got " + fields[2]);
    records.push_back({fields[0], static_cast<std::size_t>(cycle), static_cast<int>(state)});
  }

  std::map<std::string, double> costs, values;
  if (metadata) {
    auto meta = read_metadata_csv(*metadata);
    for (std::size_t k = 0; k < meta.ids.size(); ++k) {
      costs[meta.ids[k]] = meta.costs[k];
      values[meta.ids[k]] = meta.values[k];
    }
  }
  try {
    return scenario_from_records(records, costs, values);
  } catch (const Error& e) {
    throw Error(e.code(), trace.string() + ": " + e.what());
  }
}

void save_csv(const Scenario& scenario, const std::filesystem::path& trace,
              const std::optional<std::filesystem::path>& metadata) {
  auto out = csv::open_output(trace);
  out << "poi_id,cycle,state\n";
  for (PoiIndex i = 0; i < scenario.poi_count(); ++i) {
    const auto& s = scenario.series(i);
    for (std::size_t c = 0; c < s.size(); ++c) {
      out << scenario.id(i) << ',' << c + 1 << ',' << int{s[c]} << '\n';
    }
  }
  csv::finish_output(out, trace);
  if (metadata) write_metadata_csv(scenario, *metadata);
}

}  // namespace blindspot
