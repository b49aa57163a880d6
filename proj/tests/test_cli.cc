#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "zfo/cli.hpp"
#include "zfo/config.hpp"
#include "zfo/error.hpp"

namespace zfo {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("zfo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Put(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  int Call(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return Dispatch(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

Json Slurp(const std::string& path) {
  std::ifstream in(path);
  return Json::parse(in);
}

const char* kQuadConfig = R"({
  "schema": "zfo.run/1",
  "problem": {"kind": "box_quadratic", "agents": 3, "dim": 2, "seed": 4},
  "graph": {"kind": "path"},
  "params": {"eta": 0.05, "u": 0.001, "delta": 0.01, "T": 300},
  "seed": 7,
  "cadence": 50
})";

const char* kRoutingConfig = R"({
  "schema": "zfo.run/1",
  "problem": {"kind": "routing", "n_groups": 2, "agents_per_group": 3, "seed": 1},
  "graph": {"kind": "group_chain"},
  "delays": {"kind": "none", "delta": 0},
  "params": {"eta_fstar": 0.03, "u": 0.002, "delta": 0.05, "T": 400},
  "mode": "dependence",
  "reduced_tables": true,
  "seed": 3,
  "cadence": 100
})";

TEST(Config, RoundTripsThroughJson) {
  for (const char* text : {kQuadConfig, kRoutingConfig}) {
    const ExperimentConfig a = ParseConfig(Json::parse(text));
    const ExperimentConfig b = ParseConfig(ToJson(a));
    EXPECT_TRUE(a == b);
    EXPECT_EQ(ToJson(a), ToJson(b));
  }
}

TEST(Config, EdgesAndBernoulliRoundTrip) {
  Json j = Json::parse(kQuadConfig);
  j["graph"] = {{"kind", "edges"}, {"edges", {{1, 2}, {2, 3}}}};
  j["delays"] = {{"kind", "bernoulli"}, {"p", 0.25}, {"delta", 4}};
  j["params"]["sigma"] = 0.1;
  j["x0"] = {{0.1, 0.2}, {0.0, 0.0}, {-0.3, 0.5}};
  const ExperimentConfig a = ParseConfig(j);
  EXPECT_EQ(a.graph.edges, (std::vector<std::pair<int, int>>{{1, 2}, {2, 3}}));
  EXPECT_EQ(a.delays.p, 0.25);
  EXPECT_TRUE(ParseConfig(ToJson(a)) == a);
}

std::string ErrorOf(const Json& j) {
  try {
    ParseConfig(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ErrorsNameTheField) {
  Json j = Json::parse(kQuadConfig);
  j["params"]["eta"] = "fast";
  EXPECT_EQ(ErrorOf(j).rfind("params.eta", 0), 0u) << ErrorOf(j);
  j = Json::parse(kQuadConfig);
  j["graph"]["colour"] = 1;
  EXPECT_NE(ErrorOf(j).find("graph.colour"), std::string::npos) << ErrorOf(j);
  j = Json::parse(kQuadConfig);
  j.erase("schema");
  EXPECT_NE(ErrorOf(j).find("schema"), std::string::npos);
  j = Json::parse(kQuadConfig);
  j["schema"] = "zfo.run/9";
  EXPECT_NE(ErrorOf(j).find("schema"), std::string::npos);
  j = Json::parse(kQuadConfig);
  j["problem"].erase("agents");
  EXPECT_NE(ErrorOf(j).find("problem.agents"), std::string::npos);
  j = Json::parse(kQuadConfig);
  j["params"]["eta_fstar"] = 0.1;
  EXPECT_NE(ErrorOf(j).find("params.eta"), std::string::npos);
  j = Json::parse(kQuadConfig);
  j["delays"] = {{"kind", "bernoulli"}, {"p", 1.5}};
  EXPECT_NE(ErrorOf(j).find("delays.p"), std::string::npos);
  j = Json::parse(kQuadConfig);
  j["graph"] = {{"kind", "edges"}, {"edges", {{1, "b"}}}};
  EXPECT_NE(ErrorOf(j).find("graph.edges"), std::string::npos) << ErrorOf(j);
}

TEST(Config, OverridesApply) {
  ExperimentConfig cfg = ParseConfig(Json::parse(kQuadConfig));
  Overrides o;
  o.eta = 0.2;
  o.T = 50;
  o.p_drop = 0.1;
  ApplyOverrides(cfg, o);
  EXPECT_EQ(*cfg.params.eta, 0.2);
  EXPECT_EQ(cfg.params.T, 50);
  EXPECT_EQ(cfg.delays.kind, "bernoulli");
  o = {};
  o.u = -1.0;
  EXPECT_THROW(ApplyOverrides(cfg, o), ConfigError);
}

TEST(Config, ResolveScalesByOptimum) {
  const Experiment e = Resolve(ParseConfig(Json::parse(kRoutingConfig)));
  ASSERT_TRUE(e.run.f_star.has_value());
  ASSERT_TRUE(e.oracle.has_value());
  EXPECT_NEAR(e.run.params.eta, 0.03 / *e.run.f_star, 1e-15);
  EXPECT_EQ(e.graph.n(), 6);
  EXPECT_EQ(e.run.mode, EstimatorMode::kDependence);
}

TEST(Config, DerivedConstantsForBoxQuadratic) {
  const Experiment e = Resolve(ParseConfig(Json::parse(kQuadConfig)));
  const DerivedConstants d = DeriveConstants(e);
  EXPECT_FALSE(d.estimated);
  EXPECT_EQ(d.constants.n, 3);
  EXPECT_EQ(d.constants.d, 6);
  EXPECT_EQ(d.constants.B, 2);
  EXPECT_NEAR(d.constants.R_bar, std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(d.constants.b_bar, std::sqrt(12.0 / 9.0), 1e-12);
  const ProblemConstants back = ParseConstants(ToJson(d.constants));
  EXPECT_EQ(back.G, d.constants.G);
  EXPECT_EQ(back.D_bar, d.constants.D_bar);
}

TEST_F(CliTest, RunWritesTraceAndSummary) {
  const std::string cfg = Put("q.json", kQuadConfig);
  EXPECT_EQ(Call({"run", "--config", cfg, "--trace", Path("t.csv"), "--summary", Path("s.json")}), kExitOk)
      << err_.str();
  std::ifstream csv(Path("t.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,f,gap,grad_sq,stale_max,feasible,fallbacks");
  const Json s = Slurp(Path("s.json"));
  EXPECT_EQ(s["schema"], "zfo.summary/1");
  EXPECT_EQ(s["ergodic_samples"], 299);
  EXPECT_TRUE(s["assumption_clean"].get<bool>());
  // The echoed config re-parses to the input.
  EXPECT_TRUE(ParseConfig(s["config"]) == ParseConfig(Json::parse(kQuadConfig)));
}

TEST_F(CliTest, RunOverridesAndSeed) {
  const std::string cfg = Put("q.json", kQuadConfig);
  ASSERT_EQ(Call({"run", "--config", cfg, "--seed", "11", "--T", "20", "--eta", "0.5", "--trace", Path("t.csv"),
                  "--summary", Path("s.json")}),
            kExitOk);
  const Json s = Slurp(Path("s.json"));
  EXPECT_EQ(s["config"]["seed"], 11);
  EXPECT_EQ(s["config"]["params"]["T"], 20);
  EXPECT_EQ(s["resolved_params"]["eta"], 0.5);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Call({"run", "--config", Path("missing.json")}), kExitConfig);
  EXPECT_EQ(Call({"bogus"}), kExitConfig);
  Json bad = Json::parse(kQuadConfig);
  bad["params"]["u"] = "small";
  EXPECT_EQ(Call({"run", "--config", Put("bad.json", bad.dump())}), kExitConfig);
  EXPECT_NE(err_.str().find("params.u"), std::string::npos) << err_.str();

  Json drop = Json::parse(kQuadConfig);
  drop["delays"] = {{"kind", "bernoulli"}, {"p", 0.4}, {"delta", 0}};
  drop["history_margin"] = 200;
  EXPECT_EQ(Call({"run", "--config", Put("drop.json", drop.dump()), "--trace", Path("t.csv"), "--summary",
                  Path("s.json")}),
            kExitAssumption);

  drop["history_margin"] = 0;
  drop["params"]["T"] = 3000;
  drop["delays"]["p"] = 0.7;
  EXPECT_EQ(Call({"run", "--config", Put("miss.json", drop.dump()), "--trace", Path("t.csv"), "--summary",
                  Path("s.json")}),
            kExitAssumption);
  EXPECT_NE(err_.str().find("protocol"), std::string::npos);

  const std::string routing = Put("r.json", kRoutingConfig);
  EXPECT_EQ(Call({"oracle", "--config", routing, "--max-iterations", "3"}), kExitOracle);
  EXPECT_EQ(Call({"oracle", "--config", routing, "--out", Path("o.json")}), kExitOk);
  EXPECT_TRUE(Slurp(Path("o.json"))["converged"].get<bool>());
}

TEST_F(CliTest, StatsOnPathOfThree) {
  const std::string g = Put("path3.edges", "1 2\n2 3\n");
  ASSERT_EQ(Call({"stats", "--graph", g, "--delta", "0"}), kExitOk);
  const Json j = Json::parse(out_.str());
  EXPECT_NEAR(j["b_bar"].get<double>(), 1.15470, 1e-5);
  EXPECT_EQ(j["B"], 2);
  EXPECT_EQ(j["distances"][0][2], 2);
}

TEST_F(CliTest, PlanFromConstantsIsClean) {
  Json c{{"schema", "zfo.constants/1"}, {"G", 1.0}, {"L", 2.0}, {"R_bar", 2.0}, {"r_under", 1.0}, {"n", 3},
         {"d", 6}, {"b_frak", 0.9}, {"b_bar", 0.9}, {"B", 2}, {"sigma", 0.0}, {"D_bar", 3.0}};
  const std::string path = Put("c.json", c.dump());
  ASSERT_EQ(Call({"plan", "--regime", "convex-noiseless", "--eps", "0.1", "--constants", path, "--scaling",
                  "0.2,0.1,0.05,0.025"}),
            kExitOk)
      << err_.str();
  const Json j = Json::parse(out_.str());
  EXPECT_TRUE(j["verify"]["clean"].get<bool>());
  EXPECT_GT(j["plan"]["delta"].get<double>(), 0.0);
  EXPECT_NEAR(j["scaling"]["exponent"].get<double>(), 2.0, 0.1);
  EXPECT_GT(j["bound"].get<double>(), 0.0);
  EXPECT_EQ(Call({"plan", "--regime", "convex-noisy", "--eps", "0.1", "--constants", path}), kExitConfig);
  EXPECT_EQ(Call({"plan", "--regime", "convex-noiseless", "--eps", "0.1"}), kExitConfig);
}

TEST_F(CliTest, PlanFromConfigDerivesConstants) {
  const std::string cfg = Put("q.json", kQuadConfig);
  ASSERT_EQ(Call({"plan", "--regime", "convex-noiseless", "--eps", "0.5", "--config", cfg, "--out", Path("p.json")}),
            kExitOk)
      << err_.str();
  const Json j = Slurp(Path("p.json"));
  EXPECT_FALSE(j["derivation"]["estimated"].get<bool>());
  EXPECT_TRUE(j["verify"]["clean"].get<bool>());
}

TEST_F(CliTest, SweepAggregates) {
  const std::string cfg = Put("r.json", kRoutingConfig);
  ASSERT_EQ(Call({"sweep", "--config", cfg, "--seeds", "4", "--workers", "2", "--out-dir", Path("sw")}), kExitOk)
      << err_.str();
  std::ifstream agg(Path("sw/aggregate.csv"));
  std::string header, line;
  std::getline(agg, header);
  EXPECT_EQ(header, "t,mean_f,std_f,mean_gap,std_gap,mean_rel_gap,std_rel_gap,seeds");
  int rows = 0;
  while (std::getline(agg, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "4");
  }
  EXPECT_EQ(rows, 5);  // t = 0, 100, 200, 300, 400
  for (int s = 3; s < 7; ++s) EXPECT_TRUE(fs::exists(Path("sw/seed_" + std::to_string(s) + ".csv")));
  const Json j = Slurp(Path("sw/sweep.json"));
  EXPECT_EQ(j["runs"].size(), 4u);
  EXPECT_GT(j["f_star"].get<double>(), 0.0);
}

TEST_F(CliTest, SweepIsWorkerCountIndependent) {
  const std::string cfg = Put("r.json", kRoutingConfig);
  ASSERT_EQ(Call({"sweep", "--config", cfg, "--seeds", "3", "--workers", "1", "--out-dir", Path("a")}), kExitOk);
  ASSERT_EQ(Call({"sweep", "--config", cfg, "--seeds", "3", "--workers", "3", "--out-dir", Path("b")}), kExitOk);
  for (const char* f : {"aggregate.csv", "seed_4.csv"}) {
    std::ifstream a(Path(std::string("a/") + f)), b(Path(std::string("b/") + f));
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << f;
  }
}

TEST(Workers, EnvironmentOverride) {
  setenv("ZFO_WORKERS", "3", 1);
  EXPECT_EQ(DefaultWorkers(), 3);
  setenv("ZFO_WORKERS", "zero", 1);
  EXPECT_GE(DefaultWorkers(), 1);
  unsetenv("ZFO_WORKERS");
}

}  // namespace
}  // namespace zfo
