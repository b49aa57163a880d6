#include "zfo/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "zfo/error.hpp"

namespace zfo {
namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kFiniteDifferenceStep = 1e-5;

std::string Agent(int i) { return "agent " + std::to_string(i + 1); }

ActionProfile AddScaled(const ActionProfile& x, double alpha, const ActionProfile& z) {
  ActionProfile out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + alpha * z[i];
  return out;
}

double FormatGap(double f, std::optional<double> f_star) {
  return f_star ? f - *f_star : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string ToString(EstimatorMode mode) { return mode == EstimatorMode::kFull ? "full" : "dependence"; }

EstimatorMode ParseEstimatorMode(const std::string& name) {
  if (name == "full") return EstimatorMode::kFull;
  if (name == "dependence") return EstimatorMode::kDependence;
  throw ConfigError("mode: expected 'full' or 'dependence', got '" + name + "'");
}

MetricsSnapshot TakeMetrics(const Problem& problem, const ActionProfile& x, std::optional<double> f_star) {
  MetricsSnapshot m;
  m.f = problem.Objective(x);
  m.gap = FormatGap(m.f, f_star);
  if (problem.has_gradient()) {
    m.grad_sq = SquaredNorm(problem.Gradient(x));
    return m;
  }
  m.finite_difference = true;
  ActionProfile probe = x;
  double sq = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (Eigen::Index k = 0; k < probe[i].size(); ++k) {
      const double orig = probe[i][k];
      probe[i][k] = orig + kFiniteDifferenceStep;
      const double up = problem.Objective(probe);
      probe[i][k] = orig - kFiniteDifferenceStep;
      const double down = problem.Objective(probe);
      probe[i][k] = orig;
      const double g = (up - down) / (2.0 * kFiniteDifferenceStep);
      sq += g * g;
    }
  }
  m.grad_sq = sq;
  return m;
}

Simulation::Simulation(const Problem& problem, const CommGraph& graph, const RunConfig& config)
    : problem_(problem),
      graph_(graph),
      config_(config),
      mail_(graph),
      noise_(config.params.sigma, problem.n(), config.seed),
      network_rng_(MakeStream(config.seed, 0, StreamPurpose::kNetwork)) {
  const RunParams& p = config_.params;
  const int n = problem.n();
  if (graph.n() != n) {
    throw ConfigError("graph: has " + std::to_string(graph.n()) + " agents, problem has " + std::to_string(n));
  }
  if (!(p.eta > 0.0)) throw ConfigError("params.eta: must be positive");
  if (!(p.u > 0.0)) throw ConfigError("params.u: must be positive");
  if (!(p.delta >= 0.0 && p.delta < 1.0)) throw ConfigError("params.delta: must be in [0, 1)");
  if (p.T < 0) throw ConfigError("params.T: must be nonnegative");
  if (config_.cadence < 1) throw ConfigError("cadence: must be positive");
  if (config_.history_margin < 0) throw ConfigError("history_margin: must be nonnegative");
  if (config_.delays.delta < 0) throw ConfigError("delays.delta: must be nonnegative");

  std::optional<DependenceSets> deps;
  if (config_.mode == EstimatorMode::kDependence || config_.reduced_tables) {
    if (!problem.dependence()) throw ConfigError("mode: " + problem.kind() + " has no dependence sets");
    deps = NormalizeDependence(*problem.dependence(), n);
  }
  if (config_.reduced_tables) {
    if (config_.mode != EstimatorMode::kDependence) {
      throw ConfigError("reduced_tables: requires mode 'dependence'");
    }
    const CompatibilityVerdict verdict = CheckCompatibility(graph, *deps);
    if (!verdict.compatible) {
      const auto& w = *verdict.witness;
      throw ConfigError("reduced_tables: graph incompatible with dependence sets (i=" + std::to_string(w[0] + 1) +
                        ", j=" + std::to_string(w[1] + 1) + ", l=" + std::to_string(w[2] + 1) + ")");
    }
    base_ = ReducedDistances(graph, *deps);
  } else {
    base_ = Distances(graph);
  }
  B_ = base_.maxCoeff() + config_.delays.delta;

  for (int i = 0; i < n; ++i) shrunk_.push_back(Shrink(problem.sets()[static_cast<std::size_t>(i)], p.delta));

  ActionProfile x0(static_cast<std::size_t>(n));
  if (config_.x0) {
    if (static_cast<int>(config_.x0->size()) != n) throw ConfigError("x0: one vector per agent required");
    x0 = *config_.x0;
  }
  const std::size_t capacity = static_cast<std::size_t>(B_) + 1 + static_cast<std::size_t>(config_.history_margin);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const int dim = problem.dims()[k];
    if (!config_.x0) x0[k] = Vec::Zero(dim);
    if (x0[k].size() != dim) throw ConfigError("x0: " + Agent(i) + " has the wrong dimension");
    const Vec projected = Project(shrunk_[k], x0[k]);
    if ((projected - x0[k]).norm() > 1e-12) {
      warnings_.push_back("x0 of " + Agent(i) + " projected onto the shrunk set");
    }
    InfoTable table = config_.reduced_tables ? InfoTable(n, (*deps)[k]) : InfoTable(n);
    std::optional<std::vector<int>> dependence;
    if (config_.mode == EstimatorMode::kDependence) dependence = (*deps)[k];
    agents_.push_back(AgentState{i, projected, std::move(table), PerturbationHistory(capacity, dim),
                                 MakeStream(config_.seed, static_cast<std::uint64_t>(i), StreamPurpose::kPerturbation),
                                 std::move(dependence)});
  }

  double r_under = std::numeric_limits<double>::infinity();
  for (const ConvexSet& set : problem.sets()) r_under = std::min(r_under, set.inner_radius());
  if (std::isfinite(r_under)) {
    const double limit = p.delta * r_under / (3.0 * std::sqrt(static_cast<double>(problem.total_dim())));
    if (p.u > limit) {
      warnings_.push_back("u = " + std::to_string(p.u) + " exceeds delta * r / (3 sqrt(d)) = " + std::to_string(limit));
    }
  }
}

ActionProfile Simulation::x() const {
  ActionProfile out;
  out.reserve(agents_.size());
  for (const AgentState& a : agents_) out.push_back(a.x);
  return out;
}

void Simulation::Step() {
  const RunParams& p = config_.params;
  const int n = problem_.n();
  const Round t = t_;
  const ActionProfile x = this->x();

  // (1) perturbation directions
  z_.assign(static_cast<std::size_t>(n), Vec());
  fallbacks_ = 0;
  feasible_ = true;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    AgentState& a = agents_[k];
    if (!shrunk_[k].contains(a.x, kFeasTol)) feasible_ = false;
    PerturbationSample s = SamplePerturbation(problem_.sets()[k], a.x, p.u, a.perturbation_rng);
    if (s.fallback) ++fallbacks_;
    z_[k] = s.z;
    a.history.Push(t, std::move(s.z));
  }

  // (2), (3) synchronous perturbed actions
  const ActionProfile plus = AddScaled(x, p.u, z_);
  const ActionProfile minus = AddScaled(x, -p.u, z_);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const ConvexSet& set = problem_.sets()[k];
    if (!set.contains(plus[k], kFeasTol) || !set.contains(minus[k], kFeasTol)) {
      throw DomainError("round " + std::to_string(t) + ": " + Agent(i) + " would act outside its feasible set");
    }
  }
  const std::vector<double> f_plus = Observe(problem_, noise_, plus);
  const std::vector<double> f_minus = Observe(problem_, noise_, minus);

  // (4) own quotient
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    LocalQuotient(agents_[k], f_plus[k], f_minus[k], p.u, t);
  }

  // (5) receive last round's tables and merge
  auto inboxes = mail_.DeliverRound(config_.delays, network_rng_);
  stale_max_ = 0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    AgentState& a = agents_[k];
    std::vector<Round> before;
    before.reserve(a.table.columns().size());
    for (int j : a.table.columns()) before.push_back(a.table.stamp(j));
    MergeTables(a, inboxes[k], t);
    std::size_t c = 0;
    for (int j : a.table.columns()) {
      const Round stamp = a.table.stamp(j);
      if (stamp < before[c++]) throw InternalError("merge: stamp decreased for " + Agent(i));
      const int stale = static_cast<int>(t - stamp);
      stale_max_ = std::max(stale_max_, stale);
      delta_hat_ = std::max(delta_hat_, stale - base_(i, j));
    }
  }

  // (6) send
  for (int i = 0; i < n; ++i) mail_.Send(i, agents_[static_cast<std::size_t>(i)].table);

  // (7) gradient assembly and mirror step
  g_.assign(static_cast<std::size_t>(n), Vec());
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    AgentState& a = agents_[k];
    g_[k] = AssembleGradient(a, n, t);
    Vec next = MirrorStep(a.x, g_[k], p.eta, shrunk_[k]);
    if ((next - a.x).norm() > p.eta * g_[k].norm() + kFeasTol) ++step_violations_;
    a.x = std::move(next);
  }
  ++t_;
}

RunTrace Run(const Problem& problem, const CommGraph& graph, const RunConfig& config, const RoundObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  Simulation sim(problem, graph, config);
  const std::int64_t T = config.params.T;
  const int B = sim.B();
  if (T < B) throw ConfigError("params.T: must be at least B = " + std::to_string(B));
  std::optional<double> f_star = config.f_star ? config.f_star : problem.known_optimum();

  RunTrace trace;
  trace.B = B;
  ActionProfile sum;
  double grad_sum = 0.0;
  for (Round t = 0; t <= T; ++t) {
    const ActionProfile x = sim.x();
    sim.Step();
    trace.fallbacks += sim.last_fallbacks();
    if (!sim.last_feasible()) ++trace.feasibility_violations;
    const bool stored = t % config.cadence == 0 || t == T;
    const bool ergodic = t >= B;
    if (!stored && !ergodic && !observer) continue;
    const MetricsSnapshot m = TakeMetrics(problem, x, f_star);
    trace.finite_difference_gradient = trace.finite_difference_gradient || m.finite_difference;
    MetricRecord rec{t, m.f, m.gap, m.grad_sq, sim.last_stale_max(), sim.last_feasible(), sim.last_fallbacks()};
    if (ergodic) {
      if (sum.empty()) {
        sum = x;
      } else {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += x[i];
      }
      grad_sum += m.grad_sq;
      ++trace.ergodic_samples;
    }
    if (stored) trace.records.push_back(rec);
    if (observer) observer(sim, rec);
  }
  const double count = static_cast<double>(trace.ergodic_samples);
  trace.x_bar = sum;
  for (Vec& v : trace.x_bar) v /= count;
  trace.f_x_bar = problem.Objective(trace.x_bar);
  trace.gap_x_bar = FormatGap(trace.f_x_bar, f_star);
  trace.mean_grad_sq = grad_sum / count;
  trace.delta_hat = sim.delta_hat();
  trace.assumption_clean = trace.delta_hat <= config.delays.delta;
  trace.step_bound_violations = sim.step_bound_violations();
  trace.warnings = sim.warnings();
  if (!trace.assumption_clean) {
    trace.warnings.push_back("realized extra staleness " + std::to_string(trace.delta_hat) +
                             " exceeds the configured bound " + std::to_string(config.delays.delta));
  }
  if (trace.finite_difference_gradient) trace.warnings.push_back("gradient metrics use finite differences");
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

void WriteTraceCsv(const RunTrace& trace, std::ostream& out) {
  out << "t,f,gap,grad_sq,stale_max,feasible,fallbacks\n";
  out.precision(17);
  for (const MetricRecord& r : trace.records) {
    out << r.t << ',' << r.f << ',';
    if (std::isnan(r.gap)) {
      out << "nan";
    } else {
      out << r.gap;
    }
    out << ',' << r.grad_sq << ',' << r.stale_max << ',' << (r.feasible ? 1 : 0) << ',' << r.fallbacks << '\n';
  }
}

}  // namespace zfo
