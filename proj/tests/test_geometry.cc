#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "zfo/error.hpp"
#include "zfo/geometry.hpp"

namespace zfo {
namespace {

Vec V(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

// Plain inequality check for the translated, scaled simplex.
bool InSimplex(const Vec& y, const Vec& shift, double scale = 1.0, double tol = 0.0) {
  const Vec v = (y - shift) / scale;
  return v.minCoeff() >= -tol && v.sum() <= 1.0 + tol;
}

std::vector<ConvexSet> SampleSets() {
  return {
      ConvexSet::MakeBox(V({-1, -2}), V({1, 0.5})),
      ConvexSet::MakeBall(V({0.1, -0.2}), 0.8),
      ConvexSet::MakeSimplex(V({-0.25, -0.25})),
      ConvexSet::MakeIntersection({ConvexSet::MakeBall(V({0, 0}), 1.0), ConvexSet::MakeBox(V({-0.5, -2}), V({2, 0.3}))}),
      ConvexSet::MakeIntersection({ConvexSet::MakeSimplex(V({-0.3, -0.3})), ConvexSet::MakeBall(V({0, 0}), 0.4)}),
  };
}

TEST(Project, BoxClamps) {
  const ConvexSet box = ConvexSet::MakeBox(V({-1, -1}), V({1, 1}));
  const Vec p = Project(box, V({2, 0.5}));
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Project, MembersAreFixed) {
  Rng rng(3);
  for (const ConvexSet& s : SampleSets()) {
    for (int k = 0; k < 50; ++k) {
      const Vec inside = Project(s, StandardGaussian(2, rng));
      EXPECT_LE((Project(s, inside) - inside).norm(), 1e-9);
    }
  }
}

TEST(Project, SimplexMatchesFaceOracle) {
  const ConvexSet simplex = ConvexSet::MakeSimplex(V({0, 0}));
  const Vec p = V({0.8, 0.8});
  const Vec expected = oracle::FaceProject(oracle::Simplex2D(0, 0), p);
  EXPECT_NEAR(expected[0], 0.5, 1e-6);
  EXPECT_NEAR(expected[1], 0.5, 1e-6);
  const Vec got = Project(simplex, p);
  EXPECT_LE((got - expected).norm(), 1e-6);
}

TEST(Project, RandomPointsMatchFaceOracle) {
  Rng rng(11);
  const Vec shift = V({-0.3, 0.1});
  const ConvexSet simplex = ConvexSet::MakeSimplex(shift);
  const ConvexSet both =
      ConvexSet::MakeIntersection({ConvexSet::MakeBall(V({0, 0}), 1.0), ConvexSet::MakeBox(V({-0.5, -2}), V({2, 0.3}))});
  oracle::Region2D in_both;
  in_both.discs.push_back({0, 0, 1.0});
  in_both.halves = {{-1, 0, 0.5}, {1, 0, 2}, {0, -1, 2}, {0, 1, 0.3}};
  for (int k = 0; k < 10; ++k) {
    const Vec p = 1.5 * StandardGaussian(2, rng);
    const Vec a = oracle::FaceProject(oracle::Simplex2D(shift[0], shift[1]), p);
    EXPECT_LE((Project(simplex, p) - a).norm(), 1e-6);
    const Vec b = oracle::FaceProject(in_both, p);
    EXPECT_LE((Project(both, p) - b).norm(), 1e-6);
  }
}

TEST(Project, Nonexpansive) {
  Rng rng(5);
  for (const ConvexSet& s : SampleSets()) {
    for (int k = 0; k < 200; ++k) {
      const Vec a = 2.0 * StandardGaussian(2, rng);
      const Vec b = 2.0 * StandardGaussian(2, rng);
      EXPECT_LE((Project(s, a) - Project(s, b)).norm(), (a - b).norm() + 1e-9);
    }
  }
}

TEST(Project, DimensionMismatchIsConfigError) {
  const ConvexSet box = ConvexSet::MakeBox(V({-1, -1}), V({1, 1}));
  EXPECT_THROW(Project(box, V({1, 2, 3})), ConfigError);
}

TEST(Shrink, BoxScales) {
  const ConvexSet s = Shrink(ConvexSet::MakeBox(V({-1}), V({1})), 0.1);
  EXPECT_TRUE(s.contains(V({0.9})));
  EXPECT_FALSE(s.contains(V({0.9 + 1e-6})));
  EXPECT_TRUE(s.contains(V({-0.9})));
  EXPECT_FALSE(s.contains(V({-0.9 - 1e-6})));
}

TEST(Shrink, ZeroIsIdentity) {
  Rng rng(9);
  for (const ConvexSet& s : SampleSets()) {
    const ConvexSet same = Shrink(s, 0.0);
    for (int k = 0; k < 50; ++k) {
      const Vec p = 2.0 * StandardGaussian(2, rng);
      EXPECT_LE((Project(same, p) - Project(s, p)).norm(), 1e-9);
    }
  }
}

TEST(Shrink, TwoRouteSimplexBounds) {
  // One free coordinate v - 1/2 for an agent with two routes.
  const ConvexSet reduced = ConvexSet::MakeSimplex(V({-0.5}));
  const ConvexSet s = Shrink(reduced, 0.1);
  EXPECT_TRUE(s.contains(V({0.05 - 0.5})));
  EXPECT_TRUE(s.contains(V({0.95 - 0.5})));
  EXPECT_FALSE(s.contains(V({0.05 - 0.5 - 1e-6})));
  EXPECT_FALSE(s.contains(V({0.95 - 0.5 + 1e-6})));
}

TEST(Shrink, InnerRadiusScales) {
  for (const ConvexSet& s : SampleSets()) {
    if (!s.origin_interior()) continue;
    EXPECT_NEAR(Shrink(s, 0.3).inner_radius(), 0.7 * s.inner_radius(), 1e-12);
  }
}

TEST(Shrink, RejectsBadDelta) {
  const ConvexSet box = ConvexSet::MakeBox(V({-1}), V({1}));
  EXPECT_THROW(Shrink(box, 1.0), ConfigError);
  EXPECT_THROW(Shrink(box, -0.1), ConfigError);
  EXPECT_THROW(Shrink(ConvexSet::MakeBox(V({0}), V({1})), 0.1), ConfigError);
}

TEST(Shrink, ShrunkPointsKeepABallInside) {
  Rng rng(21);
  const double delta = 0.2;
  for (const ConvexSet& s : SampleSets()) {
    const double r = s.inner_radius();
    ASSERT_GT(r, 0.0);
    const ConvexSet small = Shrink(s, delta);
    const Vec x = Project(small, StandardGaussian(2, rng));
    for (int k = 0; k < 1000; ++k) {
      Vec v = StandardGaussian(2, rng);
      v.normalize();
      EXPECT_TRUE(s.contains(x + delta * r * v));
    }
  }
}

TEST(Perturbation, WholeSpaceKeepsRawDraw) {
  const PerturbationSample s = ConstrainPerturbation(ConvexSet::Whole(2), V({5, -3}), 0.1, V({0.3, -1.2}));
  EXPECT_EQ(s.z, V({0.3, -1.2}));
  EXPECT_FALSE(s.fallback);
}

TEST(Perturbation, BoxInterval) {
  const ConvexSet box = ConvexSet::MakeBox(V({-1}), V({1}));
  const PerturbationSample s = ConstrainPerturbation(box, V({0.9}), 0.05, V({3.1}));
  EXPECT_NEAR(s.z[0], 2.0, 1e-12);
  EXPECT_TRUE(box.contains(V({0.9 + 0.05 * s.z[0]})));
  EXPECT_TRUE(box.contains(V({0.9 - 0.05 * s.z[0]})));
}

TEST(Perturbation, SimplexMatchesFaceOracle) {
  const Vec shift = V({-1.0 / 3, -1.0 / 3});
  const ConvexSet simplex = ConvexSet::MakeSimplex(shift);
  const Vec x = V({0.05, -0.1});
  const double u = 0.01;
  const Vec raw = V({40.0, -25.0});
  // S = (X - x)/u ∩ -(X - x)/u, two simplices in direction space.
  const Vec lo = (shift - x) / u;
  const Vec hi = (x - shift) / u;
  const oracle::Region2D S =
      oracle::Meet(oracle::Simplex2D(lo[0], lo[1], 1.0 / u), oracle::Simplex2D(hi[0], hi[1], -1.0 / u));
  const Vec expected = oracle::FaceProject(S, raw);
  EXPECT_TRUE(InSimplex(x + u * expected, shift, 1.0, 1e-9));
  EXPECT_TRUE(InSimplex(x - u * expected, shift, 1.0, 1e-9));
  const PerturbationSample s = ConstrainPerturbation(simplex, x, u, raw);
  EXPECT_LE((s.z - expected).norm(), 1e-6);
  EXPECT_TRUE(simplex.contains(x + u * s.z));
  EXPECT_TRUE(simplex.contains(x - u * s.z));
}

TEST(Perturbation, SymmetricAndFeasibleOnRandomInputs) {
  Rng rng(17);
  for (const ConvexSet& s : SampleSets()) {
    const ConvexSet small = Shrink(s, 0.1);
    for (int k = 0; k < 200; ++k) {
      const Vec x = Project(small, StandardGaussian(2, rng));
      const double u = 0.001 + 0.05 * std::abs(StandardGaussian(1, rng)[0]);
      const PerturbationSample p = SamplePerturbation(s, x, u, rng);
      EXPECT_TRUE(s.contains(x + u * p.z));
      EXPECT_TRUE(s.contains(x - u * p.z));
      const ConvexSet S = PerturbationSet(s, x, u);
      EXPECT_TRUE(S.contains(p.z, 1e-9 / u));
      EXPECT_TRUE(S.contains(-p.z, 1e-9 / u));
    }
  }
}

TEST(Perturbation, RequiresMembership) {
  const ConvexSet box = ConvexSet::MakeBox(V({-1}), V({1}));
  EXPECT_THROW(ConstrainPerturbation(box, V({2}), 0.1, V({1})), DomainError);
}

TEST(MirrorStep, PlainGradientStep) {
  const Vec x = MirrorStep(V({1, 1}), V({2, 0}), 0.5, ConvexSet::Whole(2));
  EXPECT_EQ(x, V({0, 1}));
}

TEST(MirrorStep, ZeroGradientIsFixed) {
  const ConvexSet box = ConvexSet::MakeBox(V({-1, -1}), V({1, 1}));
  EXPECT_EQ(MirrorStep(V({0.3, -0.2}), V({0, 0}), 0.7, box), V({0.3, -0.2}));
}

TEST(MirrorStep, Clamps) {
  const Vec x = MirrorStep(V({0.1}), V({4}), 0.1, ConvexSet::MakeBox(V({0}), V({1})));
  EXPECT_DOUBLE_EQ(x[0], 0.0);
}

TEST(MirrorStep, StepBoundedByEtaTimesGradient) {
  Rng rng(8);
  for (const ConvexSet& s : SampleSets()) {
    for (int k = 0; k < 200; ++k) {
      const Vec x = Project(s, StandardGaussian(2, rng));
      const Vec g = 3.0 * StandardGaussian(2, rng);
      const double eta = 0.01 + std::abs(StandardGaussian(1, rng)[0]);
      EXPECT_LE((MirrorStep(x, g, eta, s) - x).norm(), eta * g.norm() + 1e-9);
    }
  }
}

}  // namespace
}  // namespace zfo
