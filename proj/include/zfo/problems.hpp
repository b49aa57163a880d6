#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zfo/geometry.hpp"
#include "zfo/network.hpp"
#include "zfo/rng.hpp"

namespace zfo {

// One local action vector per agent.
using ActionProfile = std::vector<Vec>;

Vec Flatten(const ActionProfile& x);
ActionProfile Unflatten(const Vec& flat, const std::vector<int>& dims);
double SquaredNorm(const ActionProfile& x);

// A cooperative problem: minimize f(x) = (1/n) sum_i f_i(x) over the product
// of the agents' feasible sets. Agents only ever see f_i values through
// Observe(); gradients and optima are for diagnostics and reference solves.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string kind() const = 0;
  // f_1(x), ..., f_n(x). Callers guarantee x ∈ X.
  virtual std::vector<double> LocalCosts(const ActionProfile& x) const = 0;
  virtual bool has_gradient() const { return false; }
  // Gradient of the global objective f. Throws DomainError if unavailable.
  virtual ActionProfile Gradient(const ActionProfile& x) const;

  int n() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int total_dim() const;
  const std::vector<ConvexSet>& sets() const { return sets_; }
  double Objective(const ActionProfile& x) const;
  bool Feasible(const ActionProfile& x, double tol = kMembershipTol) const;

  // A_i (agents whose costs depend on x^i) when known.
  const std::optional<DependenceSets>& dependence() const { return dependence_; }
  std::optional<double> lipschitz() const { return lipschitz_; }
  std::optional<double> smoothness() const { return smoothness_; }
  std::optional<double> known_optimum() const { return known_optimum_; }

 protected:
  std::vector<int> dims_;
  std::vector<ConvexSet> sets_;
  std::optional<DependenceSets> dependence_;
  std::optional<double> lipschitz_;
  std::optional<double> smoothness_;
  std::optional<double> known_optimum_;
};

// Additive zero-mean Gaussian noise N(0, sigma^2) with an independent stream
// per agent. sigma = 0 gives exact observations.
class NoiseOracle {
 public:
  NoiseOracle(double sigma, int n, std::uint64_t seed);

  double sigma() const { return sigma_; }
  double Draw(int agent);

 private:
  double sigma_;
  std::vector<Rng> streams_;
};

// f_i(x) + eps_i for every agent, fresh noise per call. Throws DomainError
// when x is outside the feasible set.
std::vector<double> Observe(const Problem& problem, NoiseOracle& noise, const ActionProfile& x);

// f_i(x) = 1/2 sum_k w_ik (x_k - c_k)^2 over all joint coordinates, each
// agent on [-1, 1]^dim. Convex; every constant of the convex-regime bounds is
// available in closed form.
class BoxQuadratic : public Problem {
 public:
  BoxQuadratic(int agents, int dim, std::uint64_t seed);

  std::string kind() const override { return "box_quadratic"; }
  std::vector<double> LocalCosts(const ActionProfile& x) const override;
  bool has_gradient() const override { return true; }
  ActionProfile Gradient(const ActionProfile& x) const override;

  const ActionProfile& minimizer() const { return minimizer_; }
  // max over X of D(x* | x) for the squared Euclidean map.
  double max_divergence() const;
  // max over X of f(x) - f*.
  double max_gap() const;
  double outer_radius() const;  // R-bar
  double inner_radius() const;  // r-under

 private:
  Eigen::MatrixXd weights_;  // n x d
  Vec target_;
  ActionProfile minimizer_;
};

// Unconstrained nonconvex sum of cosines:
// f_i(x) = sum_k alpha_ik cos(<w_ik, x> + phi_ik). Globally Lipschitz and smooth.
class TrigSum : public Problem {
 public:
  TrigSum(int agents, int dim, int terms, std::uint64_t seed);

  std::string kind() const override { return "trig_sum"; }
  std::vector<double> LocalCosts(const ActionProfile& x) const override;
  bool has_gradient() const override { return true; }
  ActionProfile Gradient(const ActionProfile& x) const override;

  // A value no larger than inf f.
  double lower_bound() const;

 private:
  int terms_;
  std::vector<Eigen::MatrixXd> frequencies_;  // per agent: terms x d
  std::vector<Vec> amplitudes_;
  std::vector<Vec> phases_;
};

// ---------------------------------------------------------------- routing

struct Congestion {
  double a = 0.0;  // c(x) = a x^2 + b x + c
  double b = 0.0;
  double c = 0.0;
  double operator()(double x) const { return (a * x + b) * x + c; }
  double derivative(double x) const { return 2.0 * a * x + b; }
};

struct RoutingInstance {
  int m = 0;
  std::vector<std::vector<int>> routes;  // R_i, sorted route ids
  std::vector<double> traffic;           // Q_i
  std::vector<Congestion> congestion;    // per route
  int n_groups = 0;
  int agents_per_group = 0;

  int n() const { return static_cast<int>(routes.size()); }
  // Throws ConfigError on negative data, unused routes or agents with < 2 routes.
  void Validate() const;
};

struct RoutingSpec {
  int n_groups = 10;
  int agents_per_group = 6;
  std::uint64_t seed = 0;
};

// Groups of agents along a chain of route pairs: group g uses the pair shared
// with group g-1 (or its own first pair) and the pair shared with g+1 (or its
// own last pair), so every agent has 4 routes and m = 2 * n_groups + 2.
RoutingInstance BuildRouting(const RoutingSpec& spec);

struct RoutingCosts {
  std::vector<double> per_agent;  // f_i(v)
  double global = 0.0;            // (1/n) sum_i f_i
  double global_by_route = 0.0;   // (1/n) sum_r q_r c_r(q_r)
};

// v[i] is agent i's split over its routes (probability simplex, tol 1e-9).
RoutingCosts EvaluateRouting(const RoutingInstance& inst, const std::vector<Vec>& v);

// Simplex allocations to the reduced, origin-centred coordinates (last route
// eliminated, shifted by 1/|R_i|) and back.
ActionProfile RoutingReparam(const RoutingInstance& inst, const std::vector<Vec>& v);
std::vector<Vec> RoutingRecover(const RoutingInstance& inst, const ActionProfile& x);
// Reduced feasible set of agent i: {v >= 0, sum v <= 1} - 1/|R_i|.
ConvexSet RoutingReducedSet(int route_count);
// A_i: agents sharing at least one route with i.
DependenceSets RoutingDependence(const RoutingInstance& inst);

// Routing in reduced coordinates, as agents see it.
class RoutingProblem : public Problem {
 public:
  explicit RoutingProblem(RoutingInstance inst);

  std::string kind() const override { return "routing"; }
  std::vector<double> LocalCosts(const ActionProfile& x) const override;
  bool has_gradient() const override { return true; }
  ActionProfile Gradient(const ActionProfile& x) const override;

  const RoutingInstance& instance() const { return inst_; }

 private:
  RoutingInstance inst_;
};

// ------------------------------------------------------- reference solver

struct SolveResult {
  ActionProfile x;
  double f = 0.0;
  int iterations = 0;
  // ||x - P_X(x - grad f(x))|| at the returned point.
  double stationarity = 0.0;
  // False when the budget ran out; x is then the best iterate seen.
  bool converged = false;
};

// Projected gradient descent with a backtracked, never-increasing step,
// stopped once ||x_{k+1} - x_k|| < tol, or once a step below 1e-8 no longer
// lowers f in floating point. Throws ConfigError without an analytic gradient.
SolveResult CentralizedSolve(const Problem& problem, int max_iterations = 200000,
                             double tol = 1e-12);

}  // namespace zfo
