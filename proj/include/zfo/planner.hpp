#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zfo {

enum class Regime {
  kConvexNoiseless,
  kConvexNoisyInterior,
  kConvexNoisy,
  kNonconvexNoiseless,
  kNonconvexNoisy,
};

std::string ToString(Regime regime);
// Accepts the hyphenated names, e.g. "convex-noisy-interior". ConfigError otherwise.
Regime ParseRegime(const std::string& name);
bool IsConvex(Regime regime);

struct ProblemConstants {
  double G = 0.0;        // Lipschitz constant of every f_i
  double L = 0.0;        // smoothness constant of every f_i
  double R_bar = 0.0;    // outer radius of X
  double r_under = 0.0;  // inner radius of X (origin-centred ball inside X)
  int n = 0;
  int d = 0;
  double b_frak = 0.0;  // dimension-weighted RMS staleness bound
  double b_bar = 0.0;   // RMS staleness bound
  int B = 0;            // worst-case staleness bound
  double sigma = 0.0;
  double D_bar = 0.0;   // max over X of D(x* | x)
  double f_gap = 1.0;   // f(x(0)) - f*, nonconvex regimes
  // max over X of f - f*; caps epsilon in the convex-noiseless regime.
  std::optional<double> max_gap;
};

// Throws ConfigError naming the first field that is unusable for the regime.
void ValidateConstants(const ProblemConstants& c, Regime regime);

struct ParamPlan {
  Regime regime = Regime::kConvexNoiseless;
  double epsilon = 0.0;
  double delta = 0.0;  // 0 in the unconstrained regimes
  double u = 0.0;
  double eta = 0.0;
  std::int64_t T = 0;
};

// Sets every condition of the regime with equality. Throws DomainError when
// epsilon is outside the admissible range, InternalError if the smoothing
// radius bisection fails to bracket.
ParamPlan Plan(const ProblemConstants& c, double epsilon, Regime regime);

// u * sqrt(d + 4/9 [ln(20 G R^2 sqrt(n) / (u eps))]_+), the left side of the
// implicit smoothing-radius condition.
double SmoothingRadiusMap(const ProblemConstants& c, double epsilon, double u);

// Solves SmoothingRadiusMap(u) = delta r / 3 on (0, delta r / 3].
double SolveSmoothingRadius(const ProblemConstants& c, double epsilon, double delta);

struct InequalityCheck {
  std::string name;
  std::string relation;  // "<=" or ">="
  double bound = 0.0;
  double value = 0.0;
  double slack = 0.0;  // nonnegative when satisfied
  bool satisfied = false;
  bool equality = false;  // planned with equality
  bool tight = false;     // |slack| within 1e-9 relative
};

struct SecondOrderTerm {
  std::string name;
  double value = 0.0;
  double first_order = 0.0;
  double ratio = 0.0;
  bool exceeds = false;  // ratio > 0.1
};

struct VerifyReport {
  Regime regime = Regime::kConvexNoiseless;
  std::vector<InequalityCheck> checks;
  std::vector<SecondOrderTerm> second_order;

  bool clean() const;
};

VerifyReport VerifyPlan(const ProblemConstants& c, double epsilon, const ParamPlan& plan);

// Right-hand side of the convex bound on E f(x_bar(T)) - f*. With `interior`
// the linear smoothing and shrinkage terms are replaced by their quadratic
// counterparts. Requires T >= B.
double ConvexBound(const ProblemConstants& c, double delta, double u, double eta, std::int64_t T,
                   bool interior = false);
// Right-hand side of the nonconvex bound on the ergodic mean of
// E ||grad f(x(t))||^2 over t in [B, T].
double NonconvexBound(const ProblemConstants& c, double u, double eta, std::int64_t T);

struct ScalingRow {
  double epsilon = 0.0;
  std::int64_t T = 0;
};

struct ScalingReport {
  Regime regime = Regime::kConvexNoiseless;
  std::vector<ScalingRow> rows;
  double exponent = 0.0;  // least-squares slope of log T against log(1/eps)
};

// Needs at least 3 distinct epsilons.
ScalingReport Scaling(const ProblemConstants& c, std::span<const double> epsilons, Regime regime);

}  // namespace zfo
