#include "zfo/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "zfo/config.hpp"
#include "zfo/error.hpp"

namespace zfo {
namespace {

namespace fs = std::filesystem;

void WriteFile(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(path);
  if (!f) throw ConfigError("output: cannot write '" + path + "'");
  f << content;
}

void Emit(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
  } else {
    WriteFile(path, j.dump(2) + "\n");
  }
}

struct OverrideFlags {
  std::optional<double> eta, u, delta, sigma, p_drop;
  std::optional<std::int64_t> T;

  void Attach(CLI::App* app) {
    app->add_option("--eta", eta, "Step size override");
    app->add_option("--u", u, "Smoothing radius override");
    app->add_option("--delta", delta, "Shrinkage override");
    app->add_option("--T", T, "Last round override");
    app->add_option("--sigma", sigma, "Noise level override");
    app->add_option("--p-drop", p_drop, "Bernoulli drop probability override");
  }
  Overrides Get() const { return {eta, u, delta, T, sigma, p_drop}; }
};

ExperimentConfig LoadWithOverrides(const std::string& path, std::optional<std::uint64_t> seed,
                                   const OverrideFlags& flags) {
  ExperimentConfig cfg = LoadConfig(path);
  if (seed) cfg.seed = *seed;
  ApplyOverrides(cfg, flags.Get());
  return cfg;
}

Json RunSummary(const Experiment& e, const RunTrace& trace) {
  Json j = SummaryJson(trace, e.config);
  if (e.run.f_star) {
    j["f_star"] = *e.run.f_star;
    if (*e.run.f_star != 0.0) j["relative_gap_x_bar"] = trace.gap_x_bar / std::abs(*e.run.f_star);
  }
  if (e.oracle) j["oracle"] = {{"converged", e.oracle->converged}, {"stationarity", e.oracle->stationarity}};
  j["resolved_params"] = {{"eta", e.run.params.eta}, {"u", e.run.params.u}, {"delta", e.run.params.delta},
                          {"T", e.run.params.T},     {"sigma", e.run.params.sigma}};
  return j;
}

std::string TraceCsv(const RunTrace& trace) {
  std::ostringstream s;
  WriteTraceCsv(trace, s);
  return s.str();
}

int CmdRun(const std::string& config, std::optional<std::uint64_t> seed, const OverrideFlags& flags,
           const std::string& trace_path, const std::string& summary_path, std::ostream& out, std::ostream& err) {
  const Experiment e = Resolve(LoadWithOverrides(config, seed, flags));
  const RunTrace trace = Run(*e.problem, e.graph, e.run);
  WriteFile(trace_path, TraceCsv(trace));
  Emit(RunSummary(e, trace), summary_path, out);
  for (const std::string& w : trace.warnings) err << "warning: " << w << '\n';
  if (!trace.assumption_clean) {
    err << "assumption violated: realized extra staleness " << trace.delta_hat << '\n';
    return kExitAssumption;
  }
  return kExitOk;
}

int CmdPlan(const std::string& regime_name, double eps, const std::string& constants_path,
            const std::string& config_path, const std::vector<double>& scaling, const std::string& out_path,
            std::ostream& out) {
  const Regime regime = ParseRegime(regime_name);
  ProblemConstants c;
  Json meta;
  if (!constants_path.empty()) {
    std::ifstream in(constants_path);
    if (!in) throw ConfigError("constants: cannot open '" + constants_path + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError("constants: not valid JSON: " + std::string(e.what()));
    }
    c = ParseConstants(j);
  } else {
    const Experiment e = Resolve(LoadConfig(config_path));
    const DerivedConstants d = DeriveConstants(e);
    c = d.constants;
    meta = {{"estimated", d.estimated}, {"note", d.note}};
  }
  const ParamPlan plan = Plan(c, eps, regime);
  const VerifyReport report = VerifyPlan(c, eps, plan);
  Json j{{"constants", ToJson(c)}, {"plan", ToJson(plan)}, {"verify", ToJson(report)}};
  if (!meta.is_null()) j["derivation"] = meta;
  if (IsConvex(regime)) {
    j["bound"] = ConvexBound(c, plan.delta, plan.u, plan.eta, plan.T, regime == Regime::kConvexNoisyInterior);
  } else {
    j["bound"] = NonconvexBound(c, plan.u, plan.eta, plan.T);
  }
  if (!scaling.empty()) j["scaling"] = ToJson(Scaling(c, scaling, regime));
  Emit(j, out_path, out);
  return kExitOk;
}

int CmdStats(const std::string& graph_path, int delta, int dim, const std::string& out_path, std::ostream& out) {
  const CommGraph g = CommGraph::FromEdgeListFile(graph_path);
  const std::vector<int> dims(static_cast<std::size_t>(g.n()), dim);
  Emit(ToJson(Stats(g, dims, delta)), out_path, out);
  return kExitOk;
}

int CmdOracle(const std::string& config, int max_iterations, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  const ExperimentConfig cfg = LoadConfig(config);
  const std::unique_ptr<Problem> problem = BuildProblem(cfg.problem);
  const SolveResult r = CentralizedSolve(*problem, max_iterations);
  Emit(ToJson(r), out_path, out);
  if (!r.converged) {
    err << "reference solve did not converge; result is approximate\n";
    return kExitOracle;
  }
  return kExitOk;
}

struct Moments {
  double sum = 0.0;
  double sq = 0.0;
  void Add(double v) {
    sum += v;
    sq += v * v;
  }
  double Mean(double n) const { return sum / n; }
  double Std(double n) const {
    if (n < 2) return 0.0;
    const double m = sum / n;
    return std::sqrt(std::max(0.0, (sq - n * m * m) / (n - 1)));
  }
};

int CmdSweep(const std::string& config, int seeds, int workers, const OverrideFlags& flags,
             const std::string& out_dir, std::ostream& out, std::ostream& err) {
  if (seeds < 1) throw ConfigError("--seeds: must be positive");
  if (workers < 1) throw ConfigError("--workers: must be positive");
  const ExperimentConfig base = LoadWithOverrides(config, std::nullopt, flags);
  const Experiment e = Resolve(base);
  std::vector<RunTrace> traces(static_cast<std::size_t>(seeds));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(seeds));
  std::atomic<int> next{0};
  auto work = [&]() {
    for (int k = next++; k < seeds; k = next++) {
      try {
        RunConfig run = e.run;
        run.seed = base.seed + static_cast<std::uint64_t>(k);
        traces[static_cast<std::size_t>(k)] = Run(*e.problem, e.graph, run);
      } catch (...) {
        failures[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, seeds); ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  for (int k = 0; k < seeds; ++k) {
    if (failures[static_cast<std::size_t>(k)]) {
      err << "sweep: seed " << base.seed + static_cast<std::uint64_t>(k) << " failed\n";
      std::rethrow_exception(failures[static_cast<std::size_t>(k)]);
    }
  }

  bool clean = true;
  Json per_seed = Json::array();
  for (int k = 0; k < seeds; ++k) {
    const RunTrace& tr = traces[static_cast<std::size_t>(k)];
    ExperimentConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(k);
    const std::string stem = out_dir + "/seed_" + std::to_string(cfg.seed);
    WriteFile(stem + ".csv", TraceCsv(tr));
    Experiment view{cfg, nullptr, e.graph, e.run, e.oracle};
    WriteFile(stem + ".json", RunSummary(view, tr).dump(2) + "\n");
    per_seed.push_back({{"seed", cfg.seed}, {"gap_x_bar", tr.gap_x_bar}, {"assumption_clean", tr.assumption_clean}});
    clean = clean && tr.assumption_clean;
  }

  const double f_star = e.run.f_star.value_or(std::numeric_limits<double>::quiet_NaN());
  const double scale = std::isfinite(f_star) && f_star != 0.0 ? std::abs(f_star) : std::numeric_limits<double>::quiet_NaN();
  std::ostringstream agg;
  agg.precision(17);
  agg << "t,mean_f,std_f,mean_gap,std_gap,mean_rel_gap,std_rel_gap,seeds\n";
  const std::size_t rows = traces.front().records.size();
  const double n = static_cast<double>(seeds);
  for (std::size_t r = 0; r < rows; ++r) {
    Moments f, gap, rel;
    for (const RunTrace& tr : traces) {
      const MetricRecord& rec = tr.records[r];
      f.Add(rec.f);
      gap.Add(rec.gap);
      rel.Add(rec.gap / scale);
    }
    agg << traces.front().records[r].t << ',' << f.Mean(n) << ',' << f.Std(n) << ',' << gap.Mean(n) << ','
        << gap.Std(n) << ',' << rel.Mean(n) << ',' << rel.Std(n) << ',' << seeds << '\n';
  }
  WriteFile(out_dir + "/aggregate.csv", agg.str());
  Moments final_gap;
  for (const RunTrace& tr : traces) final_gap.Add(tr.gap_x_bar);
  Json summary{{"schema", "zfo.sweep/1"},
               {"config", ToJson(base)},
               {"seeds", seeds},
               {"workers", workers},
               {"f_star", f_star},
               {"mean_gap_x_bar", final_gap.Mean(n)},
               {"std_gap_x_bar", final_gap.Std(n)},
               {"runs", per_seed}};
  WriteFile(out_dir + "/sweep.json", summary.dump(2) + "\n");
  out << summary.dump(2) << '\n';
  if (!clean) {
    err << "assumption violated in at least one seed\n";
    return kExitAssumption;
  }
  return kExitOk;
}

}  // namespace

int DefaultWorkers() {
  if (const char* env = std::getenv("ZFO_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zeroth-order feedback optimization simulator"};
  app.require_subcommand(1);

  std::string config, trace_path = "trace.csv", summary_path = "summary.json", out_path, out_dir = "sweep";
  std::optional<std::uint64_t> seed;
  OverrideFlags run_flags, sweep_flags;
  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config, "Experiment JSON")->required();
  run->add_option("--seed", seed, "Master seed override");
  run->add_option("--trace", trace_path, "Trace CSV output");
  run->add_option("--summary", summary_path, "Summary JSON output ('-' for stdout)");
  run_flags.Attach(run);

  std::string regime, constants;
  double eps = 0.0;
  std::vector<double> scaling;
  CLI::App* plan = app.add_subcommand("plan", "Plan parameters from the complexity conditions");
  plan->add_option("--regime", regime, "convex-noiseless | convex-noisy-interior | convex-noisy | "
                                       "nonconvex-noiseless | nonconvex-noisy")->required();
  plan->add_option("--eps", eps, "Target accuracy")->required();
  auto* constants_opt = plan->add_option("--constants", constants, "Constants JSON");
  auto* config_opt = plan->add_option("--config", config, "Experiment JSON to derive constants from");
  constants_opt->excludes(config_opt);
  plan->add_option("--scaling", scaling, "Epsilons for a T(1/eps) fit")->delimiter(',');
  plan->add_option("--out", out_path, "Output JSON (default stdout)");

  std::string graph_path;
  int delta = 0, dim = 1;
  CLI::App* stats = app.add_subcommand("stats", "Network statistics of an edge list");
  stats->add_option("--graph", graph_path, "Edge list, 1-indexed 'i j' per line")->required();
  stats->add_option("--delta", delta, "Extra delay bound")->check(CLI::NonNegativeNumber);
  stats->add_option("--dim", dim, "Per-agent dimension")->check(CLI::PositiveNumber);
  stats->add_option("--out", out_path, "Output JSON (default stdout)");

  CLI::App* oracle = app.add_subcommand("oracle", "Centralized reference solve");
  oracle->add_option("--config", config, "Experiment JSON")->required();
  int max_iterations = 200000;
  oracle->add_option("--max-iterations", max_iterations, "Iteration budget")->check(CLI::PositiveNumber);
  oracle->add_option("--out", out_path, "Output JSON (default stdout)");

  int seeds = 1, workers = DefaultWorkers();
  CLI::App* sweep = app.add_subcommand("sweep", "Run consecutive seeds and aggregate");
  sweep->add_option("--config", config, "Experiment JSON")->required();
  sweep->add_option("--seeds", seeds, "Number of seeds, starting at the config seed");
  sweep->add_option("--workers", workers, "Concurrent runs (env ZFO_WORKERS)");
  sweep->add_option("--out-dir", out_dir, "Directory for traces and aggregate.csv");
  sweep_flags.Attach(sweep);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*run) return CmdRun(config, seed, run_flags, trace_path, summary_path, out, err);
    if (*plan) {
      if (constants.empty() && config.empty()) throw ConfigError("plan: give --constants or --config");
      return CmdPlan(regime, eps, constants, config, scaling, out_path, out);
    }
    if (*stats) return CmdStats(graph_path, delta, dim, out_path, out);
    if (*oracle) return CmdOracle(config, max_iterations, out_path, out, err);
    if (*sweep) return CmdSweep(config, seeds, workers, sweep_flags, out_dir, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const AssumptionViolation& e) {
    err << "assumption violation: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const ProtocolViolation& e) {
    err << "protocol violation: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const ConvergenceError& e) {
    err << "oracle: " << e.what() << '\n';
    return kExitOracle;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace zfo
