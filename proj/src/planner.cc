#include "zfo/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zfo/error.hpp"

namespace zfo {
namespace {

constexpr double kTightTol = 1e-9;
constexpr double kSecondOrderShare = 0.1;

double Sq(double v) { return v * v; }

double SqrtD(const ProblemConstants& c) { return std::sqrt(static_cast<double>(c.d)); }
double SqrtN(const ProblemConstants& c) { return std::sqrt(static_cast<double>(c.n)); }

// G^2 + (L R / 4)^2
double CurvatureMix(const ProblemConstants& c) { return Sq(c.G) + Sq(c.L * c.R_bar / 4.0); }

bool NoisyRegime(Regime r) {
  return r == Regime::kConvexNoisy || r == Regime::kConvexNoisyInterior || r == Regime::kNonconvexNoisy;
}

void RequirePositive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("constants.") + field + ": must be positive and finite");
  }
}

double ConvexDelta(const ProblemConstants& c, double epsilon, Regime regime) {
  if (regime == Regime::kConvexNoisyInterior) return std::sqrt(epsilon) / (c.R_bar * std::sqrt(2.0 * c.L));
  return epsilon / (5.0 * c.G * c.R_bar);
}

double ConvexEtaBound(const ProblemConstants& c, double epsilon, double u, Regime regime) {
  const double net = (c.b_frak + 0.5) * Sq(SqrtD(c) + 1.0);
  if (regime == Regime::kConvexNoiseless) return epsilon / (32.0 * CurvatureMix(c) * net);
  return 3.0 * u * u * epsilon / (8.0 * Sq(c.sigma) * net);
}

double NonconvexUBound(const ProblemConstants& c, double epsilon) {
  return std::sqrt(epsilon) / (4.0 * c.L * SqrtD(c));
}

double NonconvexEtaBound(const ProblemConstants& c, double epsilon, double u, Regime regime) {
  const double net = c.L * c.b_bar * SqrtN(c) * static_cast<double>(c.d);
  if (regime == Regime::kNonconvexNoiseless) return epsilon / (48.0 * net);
  return (epsilon * u * u / Sq(c.sigma)) / (2.0 * net);
}

std::int64_t IterationsNeeded(const ProblemConstants& c, double epsilon, double eta, Regime regime) {
  double need = 0.0;
  if (IsConvex(regime)) {
    need = std::ceil(15.0 * c.D_bar / (2.0 * eta * epsilon));
  } else {
    need = std::ceil(6.0 * std::max(c.f_gap, 1.0) / (eta * epsilon));
  }
  if (!(need < 9.0e18)) throw DomainError("plan: iteration count overflows");
  return static_cast<std::int64_t>(std::max(need, 1.0));
}

InequalityCheck Check(std::string name, const char* relation, double value, double bound, bool equality) {
  InequalityCheck out;
  out.name = std::move(name);
  out.relation = relation;
  out.value = value;
  out.bound = bound;
  out.equality = equality;
  out.slack = out.relation == ">=" ? value - bound : bound - value;
  const double scale = std::max(std::abs(bound), std::numeric_limits<double>::min());
  out.tight = std::abs(out.slack) <= kTightTol * scale;
  if (out.relation == "<") {
    out.satisfied = value < bound;
    out.tight = false;
  } else {
    out.satisfied = out.slack >= 0.0 || out.tight;
  }
  return out;
}

SecondOrderTerm Term(std::string name, double value, double first_order) {
  SecondOrderTerm t;
  t.name = std::move(name);
  t.value = value;
  t.first_order = first_order;
  t.ratio = first_order > 0.0 ? value / first_order : std::numeric_limits<double>::infinity();
  t.exceeds = t.ratio > kSecondOrderShare;
  return t;
}

// Contribution of the trailing staleness term of the nonconvex bound, and
// the initial-gap term it is compared against.
double TrailingTerm(const ProblemConstants& c, double u, std::int64_t T) {
  const double window = static_cast<double>(T - c.B + 1);
  const double moment = 12.0 * Sq(c.G) + Sq(c.sigma) / (2.0 * u * u);
  return c.G * static_cast<double>(c.B) / window * std::sqrt(moment * static_cast<double>(c.d));
}

}  // namespace

std::string ToString(Regime regime) {
  switch (regime) {
    case Regime::kConvexNoiseless: return "convex-noiseless";
    case Regime::kConvexNoisyInterior: return "convex-noisy-interior";
    case Regime::kConvexNoisy: return "convex-noisy";
    case Regime::kNonconvexNoiseless: return "nonconvex-noiseless";
    case Regime::kNonconvexNoisy: return "nonconvex-noisy";
  }
  throw InternalError("unknown regime");
}

Regime ParseRegime(const std::string& name) {
  for (Regime r : {Regime::kConvexNoiseless, Regime::kConvexNoisyInterior, Regime::kConvexNoisy,
                   Regime::kNonconvexNoiseless, Regime::kNonconvexNoisy}) {
    if (ToString(r) == name) return r;
  }
  throw ConfigError("regime: unknown value '" + name + "'");
}

bool IsConvex(Regime regime) {
  return regime == Regime::kConvexNoiseless || regime == Regime::kConvexNoisy ||
         regime == Regime::kConvexNoisyInterior;
}

void ValidateConstants(const ProblemConstants& c, Regime regime) {
  if (c.n <= 0) throw ConfigError("constants.n: must be positive");
  if (c.d < c.n) throw ConfigError("constants.d: must be at least n");
  if (c.B < 0) throw ConfigError("constants.B: must be nonnegative");
  if (c.b_frak < 0.0 || c.b_bar < 0.0) throw ConfigError("constants.b_bar: must be nonnegative");
  if (!(c.sigma >= 0.0)) throw ConfigError("constants.sigma: must be nonnegative");
  if (NoisyRegime(regime)) {
    RequirePositive(c.sigma, "sigma");
  } else if (c.sigma != 0.0) {
    throw ConfigError("constants.sigma: must be 0 for the " + ToString(regime) + " regime");
  }
  if (IsConvex(regime)) {
    RequirePositive(c.G, "G");
    RequirePositive(c.R_bar, "R_bar");
    RequirePositive(c.r_under, "r_under");
    RequirePositive(c.D_bar, "D_bar");
    if (!(c.L >= 0.0)) throw ConfigError("constants.L: must be nonnegative");
    if (regime == Regime::kConvexNoisyInterior) RequirePositive(c.L, "L");
    if (c.r_under > c.R_bar) throw ConfigError("constants.r_under: exceeds R_bar");
  } else {
    RequirePositive(c.L, "L");
    RequirePositive(c.b_bar, "b_bar");
    if (!(c.G >= 0.0)) throw ConfigError("constants.G: must be nonnegative");
    if (!(c.f_gap >= 0.0)) throw ConfigError("constants.f_gap: must be nonnegative");
  }
}

double SmoothingRadiusMap(const ProblemConstants& c, double epsilon, double u) {
  const double log_term = std::log(20.0 * c.G * Sq(c.R_bar) * SqrtN(c) / (u * epsilon));
  return u * std::sqrt(static_cast<double>(c.d) + 4.0 / 9.0 * std::max(log_term, 0.0));
}

double SolveSmoothingRadius(const ProblemConstants& c, double epsilon, double delta) {
  const double target = delta * c.r_under / 3.0;
  if (!(target > 0.0)) throw InternalError("smoothing radius: nonpositive target");
  double hi = target;
  // The map is at least u sqrt(d) >= u, so the bracket top is never short.
  if (!(SmoothingRadiusMap(c, epsilon, hi) >= target)) {
    throw InternalError("smoothing radius: bracket top maps below the target");
  }
  double lo = hi;
  for (int k = 0; k < 2000 && SmoothingRadiusMap(c, epsilon, lo) >= target; ++k) lo *= 0.5;
  if (!(SmoothingRadiusMap(c, epsilon, lo) < target)) {
    throw InternalError("smoothing radius: bracket bottom not found");
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (SmoothingRadiusMap(c, epsilon, mid) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

ParamPlan Plan(const ProblemConstants& c, double epsilon, Regime regime) {
  ValidateConstants(c, regime);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("plan: epsilon must be positive");
  if (regime == Regime::kConvexNoiseless && c.max_gap && epsilon > *c.max_gap) {
    throw DomainError("plan: epsilon exceeds max f - f* for the convex-noiseless regime");
  }
  ParamPlan p;
  p.regime = regime;
  p.epsilon = epsilon;
  if (IsConvex(regime)) {
    p.delta = ConvexDelta(c, epsilon, regime);
    if (!(p.delta < 1.0)) throw DomainError("plan: epsilon too large, shrinkage factor reaches 1");
    p.u = SolveSmoothingRadius(c, epsilon, p.delta);
    p.eta = ConvexEtaBound(c, epsilon, p.u, regime);
  } else {
    p.delta = 0.0;
    p.u = NonconvexUBound(c, epsilon);
    p.eta = NonconvexEtaBound(c, epsilon, p.u, regime);
  }
  p.T = static_cast<std::int64_t>(c.B) - 1 + IterationsNeeded(c, epsilon, p.eta, regime);
  return p;
}

bool VerifyReport::clean() const {
  return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& k) { return k.satisfied; });
}

VerifyReport VerifyPlan(const ProblemConstants& c, double epsilon, const ParamPlan& plan) {
  VerifyReport r;
  r.regime = plan.regime;
  const Regime regime = plan.regime;
  const double window = static_cast<double>(plan.T - c.B + 1);
  r.checks.push_back(Check("T_at_least_B", ">=", static_cast<double>(plan.T), static_cast<double>(c.B), false));
  r.checks.push_back(Check("eta_positive", ">=", plan.eta, 0.0, false));
  r.checks.back().satisfied = plan.eta > 0.0;
  if (IsConvex(regime)) {
    if (regime == Regime::kConvexNoiseless && c.max_gap) {
      r.checks.push_back(Check("epsilon_range", "<=", epsilon, *c.max_gap, false));
    }
    r.checks.push_back(Check("delta", "<=", plan.delta, ConvexDelta(c, epsilon, regime), true));
    r.checks.push_back(Check("delta_below_one", "<", plan.delta, 1.0, false));
    const double target = plan.delta * c.r_under / 3.0;
    r.checks.push_back(Check("u_log_condition", "<=", SmoothingRadiusMap(c, epsilon, plan.u), target, true));
    r.checks.push_back(Check("u_sampling_radius", "<=", plan.u, plan.delta * c.r_under / (3.0 * SqrtD(c)), false));
    r.checks.push_back(Check("eta", "<=", plan.eta, ConvexEtaBound(c, epsilon, plan.u, regime), true));
    r.checks.push_back(Check("T", ">=", window,
                             static_cast<double>(IterationsNeeded(c, epsilon, plan.eta, regime)), true));
    if (regime != Regime::kConvexNoiseless) {
      const double noise = 24.0 * plan.u * plan.u * CurvatureMix(c) / Sq(c.sigma);
      r.second_order.push_back(Term("bias_over_noise", noise, 1.0));
    }
  } else {
    r.checks.push_back(Check("u", "<=", plan.u, NonconvexUBound(c, epsilon), true));
    r.checks.push_back(Check("eta", "<=", plan.eta, NonconvexEtaBound(c, epsilon, plan.u, regime), true));
    r.checks.push_back(Check("T", ">=", window,
                             static_cast<double>(IterationsNeeded(c, epsilon, plan.eta, regime)), true));
    if (window > 0.0 && plan.eta > 0.0) {
      const double leading = 6.0 * std::max(c.f_gap, 1.0) / (5.0 * plan.eta * window);
      r.second_order.push_back(Term("staleness_tail", TrailingTerm(c, plan.u, plan.T), leading));
    }
    if (regime == Regime::kNonconvexNoisy) {
      r.second_order.push_back(Term("lipschitz_over_noise", 24.0 * Sq(c.G) * plan.u * plan.u / Sq(c.sigma), 1.0));
    }
  }
  return r;
}

double ConvexBound(const ProblemConstants& c, double delta, double u, double eta, std::int64_t T, bool interior) {
  if (T < c.B) throw ConfigError("convex bound: T must be at least B");
  const double window = static_cast<double>(T - c.B + 1);
  const double d = static_cast<double>(c.d);
  const double net = (c.b_frak + 0.5) * Sq(SqrtD(c) + 1.0 / 6.0);
  double rhs = 5.0 * c.D_bar / (4.0 * eta * window);
  rhs += 16.0 * eta * CurvatureMix(c) * net;
  if (c.sigma > 0.0) rhs += 2.0 * eta * Sq(c.sigma) / (3.0 * u * u) * net;
  rhs += 5.0 * c.G * Sq(c.R_bar) * SqrtN(c) / (2.0 * u) *
         std::exp(d / 2.0 - Sq(delta * c.r_under) / (4.0 * u * u));
  if (interior) {
    rhs += u * u * c.L * d / 2.0 + c.L * Sq(c.R_bar) * delta * delta / 2.0;
  } else {
    rhs += u * c.G * std::sqrt(d) + c.G * c.R_bar * delta;
  }
  return rhs;
}

double NonconvexBound(const ProblemConstants& c, double u, double eta, std::int64_t T) {
  if (T < c.B) throw ConfigError("nonconvex bound: T must be at least B");
  const double window = static_cast<double>(T - c.B + 1);
  const double d = static_cast<double>(c.d);
  const double moment = 12.0 * Sq(c.G) + Sq(c.sigma) / (2.0 * u * u);
  double rhs = 6.0 * c.f_gap / (5.0 * eta * window);
  rhs += 12.0 / 5.0 * eta * c.L * c.b_bar * SqrtN(c) * d * moment;
  rhs += 2.0 * u * u * Sq(c.L) * d;
  rhs += TrailingTerm(c, u, T);
  return rhs;
}

ScalingReport Scaling(const ProblemConstants& c, std::span<const double> epsilons, Regime regime) {
  if (epsilons.size() < 3) throw ConfigError("scaling: need at least 3 epsilons");
  ScalingReport out;
  out.regime = regime;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double eps : epsilons) {
    const ParamPlan p = Plan(c, eps, regime);
    out.rows.push_back({eps, p.T});
    const double x = std::log(1.0 / eps);
    const double y = std::log(static_cast<double>(p.T));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(epsilons.size());
  const double denom = m * sxx - sx * sx;
  if (!(denom > 0.0)) throw ConfigError("scaling: epsilons must not all be equal");
  out.exponent = (m * sxy - sx * sy) / denom;
  return out;
}

}  // namespace zfo
