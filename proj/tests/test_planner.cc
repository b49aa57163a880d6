#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "zfo/error.hpp"
#include "zfo/planner.hpp"
#include "zfo/rng.hpp"

namespace zfo {
namespace {

ProblemConstants Reference() {
  ProblemConstants c;
  c.G = 1.0;
  c.L = 2.0;
  c.R_bar = std::sqrt(6.0);
  c.r_under = 1.0;
  c.n = 3;
  c.d = 6;
  c.b_frak = 0.8;
  c.b_bar = 0.8;
  c.B = 1;
  c.sigma = 0.0;
  c.D_bar = 3.0;
  return c;
}

const InequalityCheck& Find(const VerifyReport& r, const std::string& name) {
  for (const auto& k : r.checks)
    if (k.name == name) return k;
  throw std::runtime_error("no check " + name);
}

ProblemConstants RandomConstants(Rng& rng, Regime regime) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProblemConstants c;
  c.n = 1 + static_cast<int>(u(rng) * 20);
  c.d = c.n * (1 + static_cast<int>(u(rng) * 4));
  c.G = 0.1 + 5 * u(rng);
  c.L = 0.1 + 5 * u(rng);
  c.R_bar = 0.5 + 3 * u(rng);
  c.r_under = c.R_bar * (0.05 + 0.9 * u(rng));
  c.b_frak = 5 * u(rng);
  c.b_bar = 0.1 + 5 * u(rng);
  c.B = static_cast<int>(u(rng) * 12);
  c.D_bar = 0.1 + 2 * c.R_bar * c.R_bar * u(rng);
  c.f_gap = 3 * u(rng);
  const bool noisy =
      regime == Regime::kConvexNoisy || regime == Regime::kConvexNoisyInterior || regime == Regime::kNonconvexNoisy;
  c.sigma = noisy ? 0.01 + u(rng) : 0.0;
  return c;
}

const Regime kAll[] = {Regime::kConvexNoiseless, Regime::kConvexNoisyInterior, Regime::kConvexNoisy,
                       Regime::kNonconvexNoiseless, Regime::kNonconvexNoisy};

TEST(Plan, ConvexShrinkage) {
  const ProblemConstants c = [] {
    ProblemConstants k = Reference();
    k.R_bar = 1.0;
    k.r_under = 0.5;
    return k;
  }();
  EXPECT_DOUBLE_EQ(Plan(c, 0.1, Regime::kConvexNoiseless).delta, 0.02);
}

TEST(Plan, NonconvexSmoothingRadius) {
  ProblemConstants c = Reference();
  c.L = 1.0;
  c.d = 4;
  c.n = 2;
  for (double eps : {0.3, 0.05, 1e-4}) {
    const ParamPlan p = Plan(c, eps, Regime::kNonconvexNoiseless);
    EXPECT_DOUBLE_EQ(p.u, std::sqrt(eps) / 8.0);
    EXPECT_EQ(p.delta, 0.0);
  }
}

TEST(Plan, ConvexNoiselessFrozenValues) {
  // Values from an independent 40-digit evaluation of the conditions.
  const ParamPlan p = Plan(Reference(), 0.1, Regime::kConvexNoiseless);
  EXPECT_NEAR(p.delta, 0.00816496580927726, 1e-16);
  EXPECT_NEAR(p.u, 0.000767252846595361, 1e-15);
  EXPECT_NEAR(p.eta, 8.08084813243709e-05, 1e-18);
  EXPECT_EQ(p.T, 2784362);
}

TEST(Plan, ConvexNoiselessReevaluated) {
  const ProblemConstants c = Reference();
  const double eps = 0.1;
  const ParamPlan p = Plan(c, eps, Regime::kConvexNoiseless);
  const double delta = eps / (5 * c.G * c.R_bar);
  EXPECT_NEAR(p.delta, delta, 1e-15);
  const double lhs =
      p.u * std::sqrt(c.d + 4.0 / 9.0 * std::max(0.0, std::log(20 * c.G * 6.0 * std::sqrt(3.0) / (p.u * eps))));
  EXPECT_NEAR(lhs, delta * c.r_under / 3, 1e-12 * delta);
  EXPECT_LE(lhs, delta * c.r_under / 3);
  EXPECT_LE(p.u, delta * c.r_under / (3 * std::sqrt(6.0)));
  const double mix = c.G * c.G + std::pow(c.L * c.R_bar / 4, 2);
  EXPECT_NEAR(p.eta, eps / (32 * mix * (c.b_frak + 0.5) * std::pow(std::sqrt(6.0) + 1, 2)), 1e-18);
  EXPECT_EQ(p.T, c.B - 1 + static_cast<std::int64_t>(std::ceil(15 * c.D_bar / (2 * p.eta * eps))));
}

TEST(Plan, NoisyStepSizes) {
  ProblemConstants c = Reference();
  c.sigma = 0.2;
  const ParamPlan a = Plan(c, 0.05, Regime::kConvexNoisy);
  const double net = (c.b_frak + 0.5) * std::pow(std::sqrt(6.0) + 1, 2);
  EXPECT_NEAR(a.eta, 3 * a.u * a.u * 0.05 / (8 * 0.04 * net), 1e-12 * a.eta);
  const ParamPlan b = Plan(c, 0.05, Regime::kConvexNoisyInterior);
  EXPECT_NEAR(b.delta, std::sqrt(0.05) / (c.R_bar * std::sqrt(2 * c.L)), 1e-15);
  const ParamPlan n = Plan(c, 0.05, Regime::kNonconvexNoisy);
  EXPECT_NEAR(n.eta, (0.05 * n.u * n.u / 0.04) / (2 * c.L * c.b_bar * std::sqrt(3.0) * 6), 1e-12 * n.eta);
  EXPECT_EQ(n.T, c.B - 1 + static_cast<std::int64_t>(std::ceil(6 * 1.0 / (n.eta * 0.05))));
}

TEST(Plan, RejectsBadInputs) {
  ProblemConstants c = Reference();
  EXPECT_THROW(Plan(c, 0.0, Regime::kConvexNoiseless), DomainError);
  EXPECT_THROW(Plan(c, 0.1, Regime::kConvexNoisy), ConfigError);  // sigma = 0
  c.max_gap = 0.05;
  EXPECT_THROW(Plan(c, 0.1, Regime::kConvexNoiseless), DomainError);
  c = Reference();
  c.sigma = 0.1;
  EXPECT_THROW(Plan(c, 0.1, Regime::kConvexNoiseless), ConfigError);
  c = Reference();
  EXPECT_THROW(Plan(c, 100.0, Regime::kConvexNoiseless), DomainError);  // delta >= 1
  c.G = 0;
  EXPECT_THROW(Plan(c, 0.1, Regime::kConvexNoiseless), ConfigError);
  EXPECT_THROW(ParseRegime("convex"), ConfigError);
  EXPECT_EQ(ParseRegime("nonconvex-noisy"), Regime::kNonconvexNoisy);
}

TEST(Verify, PlanIsCleanAndTight) {
  const ProblemConstants c = Reference();
  const ParamPlan p = Plan(c, 0.1, Regime::kConvexNoiseless);
  const VerifyReport r = VerifyPlan(c, 0.1, p);
  EXPECT_TRUE(r.clean());
  for (const auto& k : r.checks) {
    EXPECT_TRUE(k.satisfied) << k.name;
    if (k.equality && k.name != "T") {
      EXPECT_TRUE(k.tight) << k.name;
      EXPECT_LE(std::abs(k.slack), 1e-9 * std::abs(k.bound)) << k.name;
    }
  }
  EXPECT_EQ(Find(r, "T").slack, 0.0);
}

TEST(Verify, DoubledEtaIsViolated) {
  const ProblemConstants c = Reference();
  ParamPlan p = Plan(c, 0.1, Regime::kConvexNoiseless);
  p.eta *= 2;
  const VerifyReport r = VerifyPlan(c, 0.1, p);
  EXPECT_FALSE(r.clean());
  EXPECT_FALSE(Find(r, "eta").satisfied);
  EXPECT_LT(Find(r, "eta").slack, 0.0);
}

TEST(Verify, ShortTIsViolatedWithIntegerSlack) {
  const ProblemConstants c = Reference();
  ParamPlan p = Plan(c, 0.1, Regime::kConvexNoiseless);
  p.T -= 7;
  const InequalityCheck& k = Find(VerifyPlan(c, 0.1, p), "T");
  EXPECT_FALSE(k.satisfied);
  EXPECT_EQ(k.slack, -7.0);
}

TEST(Verify, RandomRoundTrips) {
  Rng rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int done = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Regime regime = kAll[trial % 5];
    const ProblemConstants c = RandomConstants(rng, regime);
    const double eps = 0.1 * c.G * c.R_bar * (0.01 + u(rng));
    ParamPlan p;
    try {
      p = Plan(c, eps, regime);
    } catch (const DomainError&) {
      continue;
    }
    ++done;
    const VerifyReport r = VerifyPlan(c, eps, p);
    EXPECT_TRUE(r.clean()) << ToString(regime) << " trial " << trial;
  }
  EXPECT_GE(done, 90);
}

TEST(SmoothingRadius, MapIsIncreasingOnBracket) {
  const ProblemConstants c = Reference();
  const double eps = 0.05;
  const double delta = eps / (5 * c.G * c.R_bar);
  const double top = delta * c.r_under / 3;
  double prev = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    const double u = top * k / 2000.0;
    const double m = SmoothingRadiusMap(c, eps, u);
    EXPECT_GT(m, prev);
    prev = m;
  }
  EXPECT_GE(SmoothingRadiusMap(c, eps, top), top);
  const double u = SolveSmoothingRadius(c, eps, delta);
  EXPECT_GT(u, 0.0);
  EXPECT_LE(SmoothingRadiusMap(c, eps, u), top);
  EXPECT_GT(SmoothingRadiusMap(c, eps, u * (1 + 1e-9)), top * (1 - 1e-9));
}

TEST(Scaling, RatiosAndExponents) {
  ProblemConstants c = Reference();
  const auto ratio = [&](Regime regime, double eps) {
    return double(Plan(c, eps / 2, regime).T) / double(Plan(c, eps, regime).T);
  };
  EXPECT_NEAR(ratio(Regime::kConvexNoiseless, 0.1), 4.0, 0.4);
  EXPECT_NEAR(ratio(Regime::kNonconvexNoiseless, 0.1), 4.0, 0.4);
  c.sigma = 0.1;
  EXPECT_NEAR(ratio(Regime::kNonconvexNoisy, 0.1), 8.0, 1.2);
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  EXPECT_NEAR(Scaling(c, eps, Regime::kNonconvexNoisy).exponent, 3.0, 0.15);
  c.sigma = 0;
  const ScalingReport s = Scaling(c, eps, Regime::kConvexNoiseless);
  EXPECT_EQ(s.rows.size(), 4u);
  EXPECT_NEAR(s.exponent, 2.0, 0.1);
  const std::vector<double> few{0.1, 0.05};
  EXPECT_THROW(Scaling(c, few, Regime::kConvexNoiseless), ConfigError);
}

TEST(Bounds, ConvexTermsByHand) {
  ProblemConstants c = Reference();
  const double delta = 0.01, u = 1e-3, eta = 1e-4;
  const std::int64_t T = 1000;
  const double d = 6, window = T - c.B + 1;
  const double mix = 1 + std::pow(2 * std::sqrt(6.0) / 4, 2);
  const double net = (0.8 + 0.5) * std::pow(std::sqrt(d) + 1.0 / 6, 2);
  const double tail = 5 * 6 * std::sqrt(3.0) / (2 * u) * std::exp(d / 2 - delta * delta / (4 * u * u));
  const double expect = 5 * 3 / (4 * eta * window) + u * std::sqrt(d) + 16 * eta * mix * net + tail + std::sqrt(6.0) * delta;
  EXPECT_NEAR(ConvexBound(c, delta, u, eta, T), expect, 1e-12 * expect);
  const double interior = expect - u * std::sqrt(d) - std::sqrt(6.0) * delta + u * u * 2 * d / 2 + 2 * 6 * delta * delta / 2;
  EXPECT_NEAR(ConvexBound(c, delta, u, eta, T, true), interior, 1e-12 * interior);
  c.sigma = 0.3;
  EXPECT_NEAR(ConvexBound(c, delta, u, eta, T) - expect, 2 * eta * 0.09 / (3 * u * u) * net, 1e-9 * expect);
  EXPECT_THROW(ConvexBound(c, delta, u, eta, 0), ConfigError);
}

TEST(Bounds, NonconvexTermsByHand) {
  ProblemConstants c = Reference();
  c.B = 3;
  c.sigma = 0.1;
  c.f_gap = 2.0;
  const double u = 0.01, eta = 1e-3;
  const std::int64_t T = 500;
  const double window = T - 3 + 1, d = 6;
  const double moment = 12 + 0.01 / (2 * u * u);
  const double expect = 6 * 2.0 / (5 * eta * window) + 12.0 / 5 * eta * 2 * 0.8 * std::sqrt(3.0) * d * moment +
                        2 * u * u * 4 * d + 3.0 / window * std::sqrt(moment * d);
  EXPECT_NEAR(NonconvexBound(c, u, eta, T), expect, 1e-12 * expect);
}

}  // namespace
}  // namespace zfo
