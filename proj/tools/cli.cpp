#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "blindspot/correlation.hpp"
#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/evaluation.hpp"
#include "blindspot/prediction.hpp"
#include "blindspot/scenario.hpp"
#include "blindspot/selection.hpp"

namespace blindspot::cli {

namespace fs = std::filesystem;

namespace {

std::optional<fs::path> optional_path(const std::string& p) {
  if (p.empty()) return std::nullopt;
  return fs::path(p);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path.string() + ": cannot open for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Known-state file: `poi_id,state`.
KnownMask read_known_file(const fs::path& path, const Scenario& history, std::size_t cycle,
                          std::vector<State>& states) {
  csv::Reader reader(path);
  reader.expect_header("poi_id,state");
  std::map<PoiIndex, State> known;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 2) reader.fail("expected 2 fields, got " + std::to_string(fields.size()));
    auto poi = history.find(fields[0]);
    if (!poi) reader.fail("unknown POI '" + fields[0] + "'");
    const auto state = csv::parse_int(fields[1], reader.line(), "state");
    if (state != 0 && state != 1) reader.fail("state must be 0 or 1, got " + fields[1]);
    if (!known.emplace(*poi, static_cast<State>(state)).second) {
      reader.fail("duplicate POI '" + fields[0] + "'");
    }
  }
  std::vector<PoiIndex> pois;
  states.clear();
  for (const auto& [poi, state] : known) {
    pois.push_back(poi);
    states.push_back(state);
  }
  return KnownMask(history.poi_count(), cycle, std::move(pois));
}

struct GenerateArgs {
  std::string config, out, meta_out;
};

struct CorrelateArgs {
  std::string trace, meta, metric = "kt", out;
  double threshold = kDefaultEdgeThreshold;
  std::size_t horizon = 0;
};

struct PredictArgs {
  std::string trace, predictor, known_file, out;
  std::size_t cycle = 0;
  double threshold = kDefaultHybridThreshold;
  double edge_threshold = kDefaultEdgeThreshold;
  bool adaptive = false;
  double known = 0.0;
  std::uint64_t seed = 0;
};

struct SelectArgs {
  std::string graph, meta, algorithm, strategy = "max", out;
  double budget = 0.0;
  std::uint64_t seed = 0;
};

struct EvaluateArgs {
  std::string trace, meta, spec, out_dir;
};

void do_generate(const GenerateArgs& a) {
  const auto scenario = generate(read_generator_config(a.config));
  save_csv(scenario, a.out, optional_path(a.meta_out));
}

void do_correlate(const CorrelateArgs& a) {
  const auto scenario = load_csv(a.trace, optional_path(a.meta));
  write_graph_csv(build_graph(scenario, a.horizon, parse_metric(a.metric), a.threshold), a.out);
}

void do_predict(const PredictArgs& a, bool known_by_fraction) {
  const auto history = load_csv(a.trace);
  Predictor predictor = parse_predictor(a.predictor);
  if (predictor.kind == PredictorKind::Random) predictor.seed = a.seed;
  if (predictor.kind == PredictorKind::BestProxyKT) {
    predictor = Predictor::best_proxy_kt(a.edge_threshold);
  }
  if (predictor.kind == PredictorKind::Hybrid) {
    predictor = a.adaptive ? Predictor::hybrid_adaptive() : Predictor::hybrid(a.threshold);
  }

  KnownMask mask;
  std::vector<State> states;
  if (known_by_fraction) {
    mask = mask_random(history, a.cycle, a.known, a.seed);
    for (PoiIndex poi : mask.known()) states.push_back(history.state(poi, a.cycle));
  } else {
    mask = read_known_file(a.known_file, history, a.cycle, states);
  }
  write_predictions_csv(predict(predictor, history, mask, states), history.ids(), a.out);
}

void do_select(const SelectArgs& a) {
  const auto meta = read_metadata_csv(a.meta);
  SelectionProblem problem;
  problem.graph = read_graph_csv(a.graph, meta.ids);
  problem.costs = meta.costs;
  problem.values = meta.values;
  problem.budget = a.budget;
  problem.validate();

  const auto strategy = parse_strategy(a.strategy);
  SelectionResult result;
  if (a.algorithm == "static") {
    result = static_greedy(problem, strategy);
  } else if (a.algorithm == "dynamic") {
    result = dynamic_greedy(problem, strategy);
  } else if (a.algorithm == "random") {
    result = random_selection(problem, a.seed);
  } else if (a.algorithm == "oracle") {
    result = exhaustive_oracle(problem);
  } else {
    throw Error(ErrorCode::Usage, "unknown algorithm '" + a.algorithm + "'");
  }
  write_selection_csv(result, problem, a.out);
}

void do_evaluate(const EvaluateArgs& a) {
  const fs::path spec_path = a.spec;
  auto spec = parse_experiment_spec(read_text(spec_path), load_csv(a.trace, optional_path(a.meta)),
                                    spec_path.parent_path());
  const auto curves = run_experiment(spec);
  const fs::path dir = a.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, dir.string() + ": " + ec.message());
  write_results_csv(curves, dir / "results.csv");

  bool any_masked = false;
  for (const auto& c : curves) any_masked = any_masked || c.selector == SelectorKind::RandomMask;
  OverageReport overage;
  if (any_masked) overage = worst_case_overage(curves, spec.baselines);
  write_overage_csv(overage, dir / "overage.csv");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return kUsage;
    default: return kDataError;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blind-spot extrapolation and budgeted source selection for POI availability"};
  app.name("blindspot");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic disaster trace");
  generate_cmd->add_option("--config", gen.config, "Generator config (JSON)")->required();
  generate_cmd->add_option("--out", gen.out, "Output trace CSV (poi_id,cycle,state)")->required();
  generate_cmd->add_option("--meta-out", gen.meta_out, "Output metadata CSV (poi_id,cost,value)");

  CorrelateArgs cor;
  auto* correlate_cmd = app.add_subcommand("correlate", "Build a thresholded correlation graph");
  correlate_cmd->add_option("--trace", cor.trace, "Trace CSV")->required();
  correlate_cmd->add_option("--meta", cor.meta, "Metadata CSV");
  correlate_cmd->add_option("--metric", cor.metric, "kt | change | change-literal")
      ->check(CLI::IsMember({"kt", "change", "change-literal"}));
  correlate_cmd->add_option("--threshold", cor.threshold, "Edge pruning threshold in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  correlate_cmd->add_option("--horizon", cor.horizon, "Use cycles 1..horizon")->required();
  correlate_cmd->add_option("--out", cor.out, "Output graph CSV")->required();

  PredictArgs pre;
  auto* predict_cmd = app.add_subcommand("predict", "Predict unreported POI states for a cycle");
  predict_cmd->add_option("--trace", pre.trace, "Trace CSV holding history through cycle-1")
      ->required();
  predict_cmd->add_option("--cycle", pre.cycle, "1-based cycle to predict")->required();
  predict_cmd
      ->add_option("--predictor", pre.predictor,
                   "random | last | majority | bestproxy | hybrid | hybrid-adaptive")
      ->required()
      ->check(CLI::IsMember({"random", "last", "majority", "bestproxy", "hybrid", "hybrid-adaptive"}));
  auto* threshold_opt =
      predict_cmd->add_option("--threshold", pre.threshold, "Hybrid switching threshold L")
          ->check(CLI::Range(0.0, 1.0));
  auto* adaptive_opt =
      predict_cmd->add_flag("--adaptive", pre.adaptive, "Hybrid: L = 1 - observed change fraction");
  threshold_opt->excludes(adaptive_opt);
  predict_cmd->add_option("--edge-threshold", pre.edge_threshold,
                          "BestProxy: Kendall's Tau pruning threshold")
      ->check(CLI::Range(0.0, 1.0));
  auto* known_opt = predict_cmd->add_option(
      "--known", pre.known, "Reveal a random fraction of this cycle's true states");
  auto* known_file_opt =
      predict_cmd->add_option("--known-file", pre.known_file, "Known states CSV (poi_id,state)");
  known_opt->excludes(known_file_opt);
  predict_cmd->add_option("--seed", pre.seed, "Seed for the mask and the random predictor")
      ->required();
  predict_cmd->add_option("--out", pre.out, "Output predictions CSV")->required();

  SelectArgs sel;
  auto* select_cmd = app.add_subcommand("select", "Choose POIs to query within a budget");
  select_cmd->add_option("--graph", sel.graph, "Correlation graph CSV")->required();
  select_cmd->add_option("--meta", sel.meta, "Metadata CSV listing every node")->required();
  select_cmd->add_option("--budget", sel.budget, "Total cost budget W")->required();
  select_cmd->add_option("--algorithm", sel.algorithm, "static | dynamic | random | oracle")
      ->required()
      ->check(CLI::IsMember({"static", "dynamic", "random", "oracle"}));
  select_cmd->add_option("--strategy", sel.strategy, "Credit rule: max | sum")
      ->check(CLI::IsMember({"max", "sum"}));
  select_cmd->add_option("--seed", sel.seed, "Seed for the random algorithm")->required();
  select_cmd->add_option("--out", sel.out, "Output selection CSV")->required();

  EvaluateArgs eva;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run an error-rate experiment");
  evaluate_cmd->add_option("--trace", eva.trace, "Trace CSV (ground truth)")->required();
  evaluate_cmd->add_option("--meta", eva.meta, "Metadata CSV");
  evaluate_cmd->add_option("--spec", eva.spec, "Experiment spec (JSON)")->required();
  evaluate_cmd->add_option("--out-dir", eva.out_dir, "Directory for results.csv and overage.csv")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "error: Usage: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (generate_cmd->parsed()) {
      do_generate(gen);
    } else if (correlate_cmd->parsed()) {
      do_correlate(cor);
    } else if (predict_cmd->parsed()) {
      if (known_opt->count() == 0 && known_file_opt->count() == 0) {
        throw Error(ErrorCode::Usage, "--known or --known-file is required");
      }
      do_predict(pre, known_opt->count() > 0);
    } else if (select_cmd->parsed()) {
      do_select(sel);
    } else if (evaluate_cmd->parsed()) {
      do_evaluate(eva);
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"blindspot"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace blindspot::cli
