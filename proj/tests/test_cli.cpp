#include <gtest/gtest.h>

#include <sstream>

#include "../tools/cli.hpp"
#include "test_helpers.hpp"

using blindspot::testing::read_file;
using blindspot::testing::write_file;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = blindspot::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = blindspot::testing::scratch_dir();
    write_file(dir_ / "gen.json", R"({"n_pois": 30, "n_clusters": 3, "seed": 2})");
    const auto r = cli({"generate", "--config", p("gen.json"), "--out", p("trace.csv"),
                        "--meta-out", p("meta.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenerateIsReproducible) {
  const auto first = read_file(dir_ / "trace.csv");
  EXPECT_EQ(line_count(first), 1u + 30u * 10u);
  ASSERT_EQ(cli({"generate", "--config", p("gen.json"), "--out", p("again.csv")}).code, 0);
  EXPECT_EQ(read_file(dir_ / "again.csv"), first);
  EXPECT_EQ(read_file(dir_ / "meta.csv").substr(0, 18), "poi_id,cost,value\n");
}

TEST_F(CliTest, CorrelateThenSelect) {
  auto r = cli({"correlate", "--trace", p("trace.csv"), "--metric", "change", "--threshold", "0.5",
                "--horizon", "5", "--out", p("graph.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir_ / "graph.csv").rfind("# metric=change", 0), 0u);

  for (const char* algo : {"static", "dynamic", "random"}) {
    r = cli({"select", "--graph", p("graph.csv"), "--meta", p("meta.csv"), "--budget", "6",
             "--algorithm", algo, "--seed", "1", "--out", p(std::string("sel-") + algo + ".csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(read_file(dir_ / (std::string("sel-") + algo + ".csv"))), 7u) << algo;
  }
  r = cli({"select", "--graph", p("graph.csv"), "--meta", p("meta.csv"), "--budget", "0",
           "--algorithm", "dynamic", "--seed", "1", "--out", p("empty.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir_ / "empty.csv"), "rank,poi_id,cost,weighted_value_at_pick\n");
  // oracle refuses 30 nodes
  r = cli({"select", "--graph", p("graph.csv"), "--meta", p("meta.csv"), "--budget", "3",
           "--algorithm", "oracle", "--seed", "1", "--out", p("o.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: TooManyNodes:", 0), 0u) << r.err;
}

TEST_F(CliTest, PredictKnownFractionAndFile) {
  auto r = cli({"predict", "--trace", p("trace.csv"), "--cycle", "6", "--predictor", "hybrid",
                "--known", "1.0", "--seed", "3", "--out", p("all.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir_ / "all.csv"), "poi_id,cycle,predicted_state,mode_used\n");

  r = cli({"predict", "--trace", p("trace.csv"), "--cycle", "6", "--predictor", "hybrid",
           "--known", "0.2", "--seed", "3", "--out", p("some.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(read_file(dir_ / "some.csv")), 1u + 24u);
  ASSERT_EQ(cli({"predict", "--trace", p("trace.csv"), "--cycle", "6", "--predictor", "hybrid",
                 "--known", "0.2", "--seed", "3", "--out", p("some2.csv")})
                .code,
            0);
  EXPECT_EQ(read_file(dir_ / "some.csv"), read_file(dir_ / "some2.csv"));

  write_file(dir_ / "known.csv", "poi_id,state\np00,0\np05,1\n");
  r = cli({"predict", "--trace", p("trace.csv"), "--cycle", "3", "--predictor", "hybrid",
           "--adaptive", "--known-file", p("known.csv"), "--seed", "0", "--out", p("k.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto k = read_file(dir_ / "k.csv");
  EXPECT_EQ(line_count(k), 1u + 28u);
  EXPECT_EQ(k.find("p00,"), std::string::npos);

  write_file(dir_ / "unknown-id.csv", "poi_id,state\nnope,0\n");
  r = cli({"predict", "--trace", p("trace.csv"), "--cycle", "3", "--predictor", "last",
           "--known-file", p("unknown-id.csv"), "--seed", "0", "--out", p("k2.csv")});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, EvaluateIsByteIdentical) {
  write_file(dir_ / "spec.json",
             R"({"eval_cycles": [2, 6], "trials": 3, "selectors": ["random-mask", "dynamic"]})");
  for (const char* out : {"run1", "run2"}) {
    const auto r = cli({"evaluate", "--trace", p("trace.csv"), "--meta", p("meta.csv"), "--spec",
                        p("spec.json"), "--out-dir", p(out)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* file : {"results.csv", "overage.csv"}) {
    const auto a = read_file(dir_ / "run1" / file);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, read_file(dir_ / "run2" / file)) << file;
  }
  EXPECT_EQ(read_file(dir_ / "run1" / "overage.csv").rfind("algorithm,fraction,worst_case_overage\n", 0),
            0u);
}

TEST_F(CliTest, ExitCodesAndSingleLineErrors) {
  auto r = cli({});
  EXPECT_EQ(r.code, 1);
  r = cli({"predict", "--trace", p("trace.csv"), "--cycle", "2", "--predictor", "hybrid",
           "--known", "0.5", "--out", p("x.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--seed"), std::string::npos) << r.err;
  EXPECT_EQ(line_count(r.err), 1u);

  r = cli({"predict", "--trace", p("trace.csv"), "--cycle", "2", "--predictor", "arima",
           "--known", "0.5", "--seed", "1", "--out", p("x.csv")});
  EXPECT_EQ(r.code, 1);

  r = cli({"correlate", "--trace", p("missing.csv"), "--metric", "kt", "--threshold", "0.5",
           "--horizon", "3", "--out", p("g.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: IoError:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("missing.csv"), std::string::npos);
  EXPECT_EQ(line_count(r.err), 1u);

  write_file(dir_ / "bad.csv", "poi_id,cycle,state\na,1,2\n");
  r = cli({"correlate", "--trace", p("bad.csv"), "--metric", "kt", "--threshold", "0.5",
           "--horizon", "1", "--out", p("g.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: ParseError:", 0), 0u) << r.err;

  r = cli({"correlate", "--trace", p("trace.csv"), "--metric", "kt", "--threshold", "0.5",
           "--horizon", "11", "--out", p("g.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: InvalidHorizon:", 0), 0u) << r.err;

  r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("evaluate"), std::string::npos);
}
