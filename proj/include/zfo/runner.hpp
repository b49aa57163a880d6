#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zfo/agent.hpp"
#include "zfo/geometry.hpp"
#include "zfo/network.hpp"
#include "zfo/problems.hpp"

namespace zfo {

struct RunParams {
  double eta = 0.0;
  double u = 0.0;
  double delta = 0.0;
  std::int64_t T = 0;
  double sigma = 0.0;
};

enum class EstimatorMode { kFull, kDependence };

std::string ToString(EstimatorMode mode);
EstimatorMode ParseEstimatorMode(const std::string& name);

struct RunConfig {
  RunParams params;
  EstimatorMode mode = EstimatorMode::kFull;
  // Each agent keeps and sends only the columns of its own dependence set.
  // Requires dependence mode and a compatible graph.
  bool reduced_tables = false;
  DelayModel delays;
  std::uint64_t seed = 0;
  // A metric record every `cadence` rounds; round T is always recorded.
  int cadence = 1;
  std::optional<ActionProfile> x0;
  // Overrides the problem's known optimum for the gap column.
  std::optional<double> f_star;
  // History holds B + 1 + history_margin rounds of perturbations.
  int history_margin = 1;
};

struct MetricRecord {
  Round t = 0;
  double f = 0.0;
  double gap = 0.0;  // NaN when f* is unknown
  double grad_sq = 0.0;
  int stale_max = 0;
  bool feasible = true;
  int fallbacks = 0;
};

struct RunTrace {
  std::vector<MetricRecord> records;
  ActionProfile x_bar;  // mean of x(t) over t in [B, T]
  double f_x_bar = 0.0;
  double gap_x_bar = 0.0;
  double mean_grad_sq = 0.0;  // mean of ||grad f(x(t))||^2 over t in [B, T]
  std::int64_t ergodic_samples = 0;
  int B = 0;
  int delta_hat = 0;  // realized max extra staleness
  bool assumption_clean = true;
  std::int64_t fallbacks = 0;
  std::int64_t feasibility_violations = 0;
  std::int64_t step_bound_violations = 0;
  bool finite_difference_gradient = false;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

// Diagnostic metrics from centralized information. Agents never see these.
struct MetricsSnapshot {
  double f = 0.0;
  double gap = 0.0;
  double grad_sq = 0.0;
  bool finite_difference = false;
};

// Uses the analytic gradient when available, central differences with step
// 1e-5 otherwise.
MetricsSnapshot TakeMetrics(const Problem& problem, const ActionProfile& x, std::optional<double> f_star);

// Round-by-round executor. Step() runs round t = round() in the order: sample
// z(t); observe at x + uz; observe at x - uz; local quotient; receive and
// merge; send; assemble G(t) and take the mirror step to x(t + 1).
class Simulation {
 public:
  Simulation(const Problem& problem, const CommGraph& graph, const RunConfig& config);

  void Step();

  Round round() const { return t_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  ActionProfile x() const;
  // State of the round last executed.
  const ActionProfile& last_perturbation() const { return z_; }
  const ActionProfile& last_gradient() const { return g_; }
  int last_fallbacks() const { return fallbacks_; }
  int last_stale_max() const { return stale_max_; }
  bool last_feasible() const { return feasible_; }
  // Staleness bound b_ij used for Delta-hat (reduced distances in reduced-table mode).
  const IntMatrix& staleness_base() const { return base_; }
  int delta_hat() const { return delta_hat_; }
  std::int64_t step_bound_violations() const { return step_violations_; }
  int B() const { return B_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  const Problem& problem_;
  const CommGraph& graph_;
  RunConfig config_;
  std::vector<ConvexSet> shrunk_;
  std::vector<AgentState> agents_;
  Mailboxes<InfoTable> mail_;
  NoiseOracle noise_;
  Rng network_rng_;
  IntMatrix base_;
  int B_ = 0;
  Round t_ = 0;
  ActionProfile z_;
  ActionProfile g_;
  int fallbacks_ = 0;
  int stale_max_ = 0;
  bool feasible_ = true;
  int delta_hat_ = 0;
  std::int64_t step_violations_ = 0;
  std::vector<std::string> warnings_;
};

// Called after every round with the simulation and the metric record of x(t).
using RoundObserver = std::function<void(const Simulation&, const MetricRecord&)>;

// Runs rounds 0..T and collects the trace.
RunTrace Run(const Problem& problem, const CommGraph& graph, const RunConfig& config,
             const RoundObserver& observer = {});

void WriteTraceCsv(const RunTrace& trace, std::ostream& out);

}  // namespace zfo
