#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zfo/network.hpp"
#include "zfo/planner.hpp"
#include "zfo/problems.hpp"
#include "zfo/runner.hpp"

namespace zfo {

using Json = nlohmann::json;

inline constexpr const char* kRunSchema = "zfo.run/1";
inline constexpr const char* kConstantsSchema = "zfo.constants/1";

struct ProblemSpec {
  std::string kind;  // routing | box_quadratic | trig_sum
  int agents = 0;
  int dim = 0;
  int terms = 0;
  int n_groups = 0;
  int agents_per_group = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct GraphSpec {
  std::string kind;  // complete | path | star | random | group_chain | edges | file
  int center = 1;    // star, 1-indexed
  int min_degree = 1;
  int max_degree = 3;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> edges;  // 1-indexed
  std::string path;
  int groups = 0;     // group_chain; 0 takes the routing layout
  int per_group = 0;

  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

struct DelaySpec {
  std::string kind = "none";  // none | bernoulli
  double p = 0.0;
  int delta = 0;

  friend bool operator==(const DelaySpec&, const DelaySpec&) = default;
};

// eta_fstar and sigma_fstar give eta = eta_fstar / f* and sigma = sigma_fstar * f*,
// with f* from the reference solve.
struct ParamSpec {
  std::optional<double> eta;
  std::optional<double> eta_fstar;
  double u = 0.0;
  double delta = 0.0;
  std::int64_t T = 0;
  std::optional<double> sigma;
  std::optional<double> sigma_fstar;

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  GraphSpec graph;
  DelaySpec delays;
  ParamSpec params;
  std::string mode = "full";
  bool reduced_tables = false;
  std::uint64_t seed = 0;
  int cadence = 1;
  std::optional<double> f_star;
  std::optional<std::vector<std::vector<double>>> x0;
  int history_margin = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Throws ConfigError with a field path, e.g. "params.eta: expected a number".
ExperimentConfig ParseConfig(const Json& j);
ExperimentConfig LoadConfig(const std::string& path);
Json ToJson(const ExperimentConfig& cfg);

std::unique_ptr<Problem> BuildProblem(const ProblemSpec& spec);
CommGraph BuildGraph(const GraphSpec& spec, const Problem& problem);

// A config turned into runnable objects.
struct Experiment {
  ExperimentConfig config;
  std::unique_ptr<Problem> problem;
  CommGraph graph;
  RunConfig run;
  std::optional<SolveResult> oracle;  // reference solve when f* was needed
};

// Runs the reference solve when f* is needed and not given (convex problems
// without a known optimum, or any *_fstar parameter).
Experiment Resolve(const ExperimentConfig& cfg);

// The parameter block with overrides applied, re-validated.
struct Overrides {
  std::optional<double> eta;
  std::optional<double> u;
  std::optional<double> delta;
  std::optional<std::int64_t> T;
  std::optional<double> sigma;
  std::optional<double> p_drop;
};
void ApplyOverrides(ExperimentConfig& cfg, const Overrides& o);

ProblemConstants ParseConstants(const Json& j);
Json ToJson(const ProblemConstants& c);

// Exact constants for box_quadratic; sampled estimates otherwise (flagged in
// the returned note). Network statistics come from the experiment's graph.
struct DerivedConstants {
  ProblemConstants constants;
  bool estimated = false;
  std::string note;
};
DerivedConstants DeriveConstants(const Experiment& e, int samples = 200);

Json ToJson(const NetworkStats& s);
Json ToJson(const ParamPlan& p);
Json ToJson(const VerifyReport& r);
Json ToJson(const ScalingReport& r);
Json ToJson(const SolveResult& r);
Json SummaryJson(const RunTrace& trace, const ExperimentConfig& cfg);

}  // namespace zfo
