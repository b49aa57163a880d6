#pragma once

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "zfo/rng.hpp"

namespace zfo {

using Vec = Eigen::VectorXd;

// Absolute Euclidean tolerance for all membership tests.
inline constexpr double kMembershipTol = 1e-9;

struct WholeSpace {
  Eigen::Index dim = 0;
};

struct Box {
  Vec lower;
  Vec upper;
};

struct Ball {
  Vec center;
  double radius = 0.0;
};

// { shift + scale * v : v >= 0, sum(v) <= 1 }. A negative scale gives the
// point-reflected simplex, which is needed for perturbation sets.
struct ShiftedSimplex {
  Vec shift;
  double scale = 1.0;
};

class ConvexSet;

// Members are never themselves intersections; the factory flattens them.
struct Intersection {
  std::vector<ConvexSet> members;
};

class ConvexSet {
 public:
  using Variant = std::variant<WholeSpace, Box, Ball, ShiftedSimplex, Intersection>;

  static ConvexSet Whole(Eigen::Index dim);
  static ConvexSet MakeBox(Vec lower, Vec upper);
  static ConvexSet MakeBall(Vec center, double radius);
  // The unit simplex {v >= 0, sum v <= 1} of dimension shift.size(), translated.
  static ConvexSet MakeSimplex(Vec shift, double scale = 1.0);
  static ConvexSet MakeIntersection(std::vector<ConvexSet> members);

  Eigen::Index dim() const;
  bool bounded() const;
  bool contains(const Vec& x, double tol = kMembershipTol) const;

  // Largest r with r*B ⊆ set (a lower bound for intersections). Zero if the
  // origin is not interior, +inf for the whole space.
  double inner_radius() const;
  // Smallest R with set ⊆ R*B (an upper bound for intersections).
  double outer_radius() const;
  bool origin_interior() const { return inner_radius() > 0.0; }

  // { scale * y + offset : y in set }, scale != 0.
  ConvexSet Affine(double scale, const Vec& offset) const;

  const Variant& variant() const { return v_; }

 private:
  explicit ConvexSet(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct DykstraOptions {
  int max_sweeps = 500;
  double tol = 1e-10;
};

// Euclidean projection. Closed forms for boxes, balls and simplices; Dykstra's
// alternating projections for intersections.
Vec Project(const ConvexSet& set, const Vec& point, const DykstraOptions& opts = {});

// (1 - delta) * set. Requires delta in [0, 1) and the origin interior to a
// bounded set; the whole space is returned unchanged.
ConvexSet Shrink(const ConvexSet& set, double delta);

// S(x, u) = (1/u)(X - x) ∩ -(1/u)(X - x), the symmetric set of admissible
// perturbation directions at x.
ConvexSet PerturbationSet(const ConvexSet& set, const Vec& x, double u);

struct PerturbationSample {
  Vec z;
  // The projection onto S(x, u) missed and z was scaled toward 0.
  bool fallback = false;
};

// z = P_S(x,u)[raw]. Guarantees x ± u z ∈ set; if the projection misses
// (intersection sets only) z is bisected toward the origin.
PerturbationSample ConstrainPerturbation(const ConvexSet& set, const Vec& x, double u,
                                         const Vec& raw);

// Draws raw ~ N(0, I) from rng and constrains it.
PerturbationSample SamplePerturbation(const ConvexSet& set, const Vec& x, double u, Rng& rng);

enum class MirrorMap { kSquaredEuclidean };

// argmin_{y in feasible} <g, y - x> + (1/eta) D_psi(y | x). For the squared
// Euclidean map this is the projection of x - eta g.
Vec MirrorStep(const Vec& x, const Vec& g, double eta, const ConvexSet& feasible,
               MirrorMap map = MirrorMap::kSquaredEuclidean);

}  // namespace zfo
