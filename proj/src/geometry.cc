#include "zfo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "zfo/error.hpp"

namespace zfo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void CheckDim(const ConvexSet& set, const Vec& x, const char* what) {
  if (x.size() != set.dim()) {
    throw ConfigError(std::string(what) + ": dimension mismatch (set " +
                      std::to_string(set.dim()) + ", point " + std::to_string(x.size()) + ")");
  }
}

// Projection onto {v >= 0, sum v <= 1}.
Vec ProjectUnitSimplex(const Vec& y) {
  Vec clipped = y.cwiseMax(0.0);
  if (clipped.sum() <= 1.0) return clipped;
  // Project onto the face sum v = 1 (sort-based threshold).
  std::vector<double> sorted(y.data(), y.data() + y.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return (y.array() - theta).cwiseMax(0.0).matrix();
}

Vec ProjectMember(const ConvexSet::Variant& v, const Vec& p);

Vec ProjectIntersection(const Intersection& inter, const Vec& p, const DykstraOptions& opts) {
  const auto& members = inter.members;
  if (members.empty()) return p;
  if (members.size() == 1) return ProjectMember(members.front().variant(), p);

  Vec x = p;
  std::vector<Vec> increments(members.size(), Vec::Zero(p.size()));
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const Vec shifted = x + increments[k];
      const Vec next = ProjectMember(members[k].variant(), shifted);
      const Vec inc = shifted - next;
      change += (next - x).squaredNorm() + (inc - increments[k]).squaredNorm();
      x = next;
      increments[k] = inc;
    }
    if (std::sqrt(change) < opts.tol) break;
  }
  const auto feasible = [&] {
    return std::all_of(members.begin(), members.end(),
                       [&](const ConvexSet& m) { return m.contains(x); });
  };
  // Dykstra may stall short of feasibility; plain cyclic projections still
  // converge to a member point, which is what callers rely on.
  for (int sweep = 0; sweep < opts.max_sweeps && !feasible(); ++sweep) {
    for (const ConvexSet& m : members) x = ProjectMember(m.variant(), x);
  }
  return x;
}

Vec ProjectMember(const ConvexSet::Variant& v, const Vec& p) {
  return std::visit(
      Overloaded{
          [&](const WholeSpace&) -> Vec { return p; },
          [&](const Box& b) -> Vec { return p.cwiseMax(b.lower).cwiseMin(b.upper); },
          [&](const Ball& b) -> Vec {
            const Vec offset = p - b.center;
            const double norm = offset.norm();
            if (norm <= b.radius) return p;
            return b.center + offset * (b.radius / norm);
          },
          [&](const ShiftedSimplex& s) -> Vec {
            const Vec y = (p - s.shift) / s.scale;
            return s.shift + s.scale * ProjectUnitSimplex(y);
          },
          [&](const Intersection& i) -> Vec { return ProjectIntersection(i, p, DykstraOptions{}); },
      },
      v);
}

double SimplexInnerRadius(const ShiftedSimplex& s) {
  // Origin in simplex coordinates.
  const Vec v0 = -s.shift / s.scale;
  const double d = static_cast<double>(v0.size());
  const double slack = 1.0 - v0.sum();
  const double r = std::min(v0.minCoeff(), slack / std::sqrt(d));
  return r > 0.0 ? std::abs(s.scale) * r : 0.0;
}

double SimplexOuterRadius(const ShiftedSimplex& s) {
  double r = s.shift.norm();
  for (Eigen::Index k = 0; k < s.shift.size(); ++k) {
    Vec vertex = s.shift;
    vertex[k] += s.scale;
    r = std::max(r, vertex.norm());
  }
  return r;
}

void Flatten(const ConvexSet& set, std::vector<ConvexSet>& out) {
  if (const auto* inter = std::get_if<Intersection>(&set.variant())) {
    for (const ConvexSet& m : inter->members) Flatten(m, out);
  } else {
    out.push_back(set);
  }
}

}  // namespace

ConvexSet ConvexSet::Whole(Eigen::Index dim) {
  if (dim <= 0) throw ConfigError("WholeSpace: dimension must be positive");
  return ConvexSet(WholeSpace{dim});
}

ConvexSet ConvexSet::MakeBox(Vec lower, Vec upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw ConfigError("Box: bound vectors must be non-empty and of equal length");
  }
  if ((lower.array() > upper.array()).any()) throw ConfigError("Box: lower bound exceeds upper");
  return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::MakeBall(Vec center, double radius) {
  if (center.size() == 0) throw ConfigError("Ball: empty center");
  if (!(radius > 0.0)) throw ConfigError("Ball: radius must be positive");
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::MakeSimplex(Vec shift, double scale) {
  if (shift.size() == 0) throw ConfigError("ShiftedSimplex: empty shift");
  if (scale == 0.0 || !std::isfinite(scale)) throw ConfigError("ShiftedSimplex: bad scale");
  return ConvexSet(ShiftedSimplex{std::move(shift), scale});
}

ConvexSet ConvexSet::MakeIntersection(std::vector<ConvexSet> members) {
  if (members.empty()) throw ConfigError("Intersection: no members");
  std::vector<ConvexSet> flat;
  for (const ConvexSet& m : members) Flatten(m, flat);
  const Eigen::Index dim = flat.front().dim();
  for (const ConvexSet& m : flat) {
    if (m.dim() != dim) throw ConfigError("Intersection: member dimensions differ");
  }
  // Boxes intersect to a box; whole spaces drop out.
  std::vector<ConvexSet> kept;
  std::optional<Box> merged;
  for (ConvexSet& m : flat) {
    if (std::holds_alternative<WholeSpace>(m.variant())) continue;
    if (const auto* b = std::get_if<Box>(&m.variant())) {
      if (!merged) {
        merged = *b;
      } else {
        merged->lower = merged->lower.cwiseMax(b->lower);
        merged->upper = merged->upper.cwiseMin(b->upper);
      }
      continue;
    }
    kept.push_back(std::move(m));
  }
  if (merged) {
    if ((merged->lower.array() > merged->upper.array()).any()) {
      throw ConfigError("Intersection: empty box intersection");
    }
    kept.insert(kept.begin(), ConvexSet(*merged));
  }
  if (kept.empty()) return Whole(dim);
  if (kept.size() == 1) return kept.front();
  return ConvexSet(Intersection{std::move(kept)});
}

Eigen::Index ConvexSet::dim() const {
  return std::visit(Overloaded{
                        [](const WholeSpace& w) { return w.dim; },
                        [](const Box& b) { return b.lower.size(); },
                        [](const Ball& b) { return b.center.size(); },
                        [](const ShiftedSimplex& s) { return s.shift.size(); },
                        [](const Intersection& i) { return i.members.front().dim(); },
                    },
                    v_);
}

bool ConvexSet::bounded() const { return !std::holds_alternative<WholeSpace>(v_); }

bool ConvexSet::contains(const Vec& x, double tol) const {
  CheckDim(*this, x, "contains");
  if (const auto* inter = std::get_if<Intersection>(&v_)) {
    return std::all_of(inter->members.begin(), inter->members.end(),
                       [&](const ConvexSet& m) { return m.contains(x, tol); });
  }
  return (ProjectMember(v_, x) - x).norm() <= tol;
}

double ConvexSet::inner_radius() const {
  return std::visit(Overloaded{
                        [](const WholeSpace&) { return kInf; },
                        [](const Box& b) {
                          const double r = std::min((-b.lower).minCoeff(), b.upper.minCoeff());
                          return r > 0.0 ? r : 0.0;
                        },
                        [](const Ball& b) {
                          const double r = b.radius - b.center.norm();
                          return r > 0.0 ? r : 0.0;
                        },
                        [](const ShiftedSimplex& s) { return SimplexInnerRadius(s); },
                        [](const Intersection& i) {
                          double r = kInf;
                          for (const ConvexSet& m : i.members) r = std::min(r, m.inner_radius());
                          return r;
                        },
                    },
                    v_);
}

double ConvexSet::outer_radius() const {
  return std::visit(Overloaded{
                        [](const WholeSpace&) { return kInf; },
                        [](const Box& b) {
                          return b.lower.cwiseAbs().cwiseMax(b.upper.cwiseAbs()).norm();
                        },
                        [](const Ball& b) { return b.center.norm() + b.radius; },
                        [](const ShiftedSimplex& s) { return SimplexOuterRadius(s); },
                        [](const Intersection& i) {
                          double r = kInf;
                          for (const ConvexSet& m : i.members) r = std::min(r, m.outer_radius());
                          return r;
                        },
                    },
                    v_);
}

ConvexSet ConvexSet::Affine(double scale, const Vec& offset) const {
  if (scale == 0.0) throw ConfigError("Affine: zero scale");
  CheckDim(*this, offset, "Affine");
  return std::visit(
      Overloaded{
          [&](const WholeSpace& w) { return ConvexSet(w); },
          [&](const Box& b) {
            Vec lo = scale * b.lower + offset;
            Vec hi = scale * b.upper + offset;
            if (scale < 0.0) std::swap(lo, hi);
            return ConvexSet(Box{std::move(lo), std::move(hi)});
          },
          [&](const Ball& b) {
            return ConvexSet(Ball{scale * b.center + offset, std::abs(scale) * b.radius});
          },
          [&](const ShiftedSimplex& s) {
            return ConvexSet(ShiftedSimplex{scale * s.shift + offset, scale * s.scale});
          },
          [&](const Intersection& i) {
            std::vector<ConvexSet> mapped;
            mapped.reserve(i.members.size());
            for (const ConvexSet& m : i.members) mapped.push_back(m.Affine(scale, offset));
            return ConvexSet(Intersection{std::move(mapped)});
          },
      },
      v_);
}

Vec Project(const ConvexSet& set, const Vec& point, const DykstraOptions& opts) {
  CheckDim(set, point, "project");
  if (const auto* inter = std::get_if<Intersection>(&set.variant())) {
    return ProjectIntersection(*inter, point, opts);
  }
  return ProjectMember(set.variant(), point);
}

ConvexSet Shrink(const ConvexSet& set, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("shrink: delta must lie in [0, 1)");
  if (!set.bounded()) return set;
  if (!set.origin_interior()) throw ConfigError("shrink: origin must be interior to the set");
  if (delta == 0.0) return set;
  return set.Affine(1.0 - delta, Vec::Zero(set.dim()));
}

ConvexSet PerturbationSet(const ConvexSet& set, const Vec& x, double u) {
  CheckDim(set, x, "perturbation set");
  if (!(u > 0.0)) throw ConfigError("perturbation set: u must be positive");
  if (const auto* box = std::get_if<Box>(&set.variant())) {
    const Vec half = (x - box->lower).cwiseMin(box->upper - x).cwiseMax(0.0) / u;
    return ConvexSet::MakeBox(-half, half);
  }
  if (!set.bounded()) return set;
  if (const auto* inter = std::get_if<Intersection>(&set.variant())) {
    std::vector<ConvexSet> parts;
    for (const ConvexSet& m : inter->members) parts.push_back(PerturbationSet(m, x, u));
    return ConvexSet::MakeIntersection(std::move(parts));
  }
  return ConvexSet::MakeIntersection(
      {set.Affine(1.0 / u, -x / u), set.Affine(-1.0 / u, x / u)});
}

PerturbationSample ConstrainPerturbation(const ConvexSet& set, const Vec& x, double u,
                                         const Vec& raw) {
  CheckDim(set, raw, "sample_perturbation");
  if (!(u > 0.0)) throw ConfigError("sample_perturbation: u must be positive");
  if (!set.contains(x)) throw DomainError("sample_perturbation: x is not in the feasible set");
  if (!set.bounded()) return {raw, false};

  const ConvexSet admissible = PerturbationSet(set, x, u);
  Vec z = Project(admissible, raw);
  const auto feasible = [&](const Vec& dir) {
    return set.contains(x + u * dir) && set.contains(x - u * dir);
  };
  if (feasible(z)) return {std::move(z), false};

  // 0 is always admissible, so bisect on the scale of z.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid * z)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo * z, true};
}

PerturbationSample SamplePerturbation(const ConvexSet& set, const Vec& x, double u, Rng& rng) {
  return ConstrainPerturbation(set, x, u, StandardGaussian(set.dim(), rng));
}

Vec MirrorStep(const Vec& x, const Vec& g, double eta, const ConvexSet& feasible, MirrorMap map) {
  CheckDim(feasible, x, "mirror_step");
  CheckDim(feasible, g, "mirror_step");
  if (!(eta > 0.0)) throw ConfigError("mirror_step: eta must be positive");
  switch (map) {
    case MirrorMap::kSquaredEuclidean:
      return Project(feasible, x - eta * g);
  }
  throw InternalError("mirror_step: unknown mirror map");
}

}  // namespace zfo
