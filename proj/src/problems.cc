#include "zfo/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "zfo/error.hpp"

namespace zfo {

Vec Flatten(const ActionProfile& x) {
  Eigen::Index total = 0;
  for (const Vec& xi : x) total += xi.size();
  Vec flat(total);
  Eigen::Index at = 0;
  for (const Vec& xi : x) {
    flat.segment(at, xi.size()) = xi;
    at += xi.size();
  }
  return flat;
}

ActionProfile Unflatten(const Vec& flat, const std::vector<int>& dims) {
  ActionProfile x;
  x.reserve(dims.size());
  Eigen::Index at = 0;
  for (int d : dims) {
    x.push_back(flat.segment(at, d));
    at += d;
  }
  if (at != flat.size()) throw ConfigError("unflatten: dimension mismatch");
  return x;
}

double SquaredNorm(const ActionProfile& x) {
  double s = 0.0;
  for (const Vec& xi : x) s += xi.squaredNorm();
  return s;
}

ActionProfile Problem::Gradient(const ActionProfile&) const {
  throw DomainError(kind() + ": no analytic gradient");
}

int Problem::total_dim() const { return std::accumulate(dims_.begin(), dims_.end(), 0); }

double Problem::Objective(const ActionProfile& x) const {
  const std::vector<double> costs = LocalCosts(x);
  return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
}

bool Problem::Feasible(const ActionProfile& x, double tol) const {
  if (static_cast<int>(x.size()) != n()) return false;
  for (int i = 0; i < n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (x[k].size() != dims_[k] || !sets_[k].contains(x[k], tol)) return false;
  }
  return true;
}

NoiseOracle::NoiseOracle(double sigma, int n, std::uint64_t seed) : sigma_(sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("noise: sigma must be nonnegative");
  streams_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) streams_.push_back(MakeStream(seed, static_cast<std::uint64_t>(i), StreamPurpose::kNoise));
}

double NoiseOracle::Draw(int agent) {
  if (sigma_ == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, sigma_);
  return normal(streams_.at(static_cast<std::size_t>(agent)));
}

std::vector<double> Observe(const Problem& problem, NoiseOracle& noise, const ActionProfile& x) {
  if (!problem.Feasible(x)) {
    throw DomainError(problem.kind() + ": observation requested outside the feasible set");
  }
  std::vector<double> values = problem.LocalCosts(x);
  for (int i = 0; i < problem.n(); ++i) values[static_cast<std::size_t>(i)] += noise.Draw(i);
  return values;
}

// ------------------------------------------------------------ BoxQuadratic

BoxQuadratic::BoxQuadratic(int agents, int dim, std::uint64_t seed) {
  if (agents <= 0 || dim <= 0) throw ConfigError("box_quadratic: sizes must be positive");
  Rng rng = MakeStream(seed, 0, StreamPurpose::kInstance);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::uniform_real_distribution<double> centre(-0.5, 0.5);
  const int d = agents * dim;
  weights_.resize(agents, d);
  for (int i = 0; i < agents; ++i) {
    for (int k = 0; k < d; ++k) weights_(i, k) = weight(rng);
  }
  target_.resize(d);
  for (int k = 0; k < d; ++k) target_[k] = centre(rng);

  dims_.assign(static_cast<std::size_t>(agents), dim);
  for (int i = 0; i < agents; ++i) {
    sets_.push_back(ConvexSet::MakeBox(Vec::Constant(dim, -1.0), Vec::Constant(dim, 1.0)));
  }
  minimizer_ = Unflatten(target_, dims_);

  // Farthest point of the box from the target, coordinatewise.
  const Vec reach = (1.0 + target_.array().abs()).matrix();
  double g = 0.0;
  for (int i = 0; i < agents; ++i) {
    g = std::max(g, weights_.row(i).transpose().cwiseProduct(reach).norm());
  }
  lipschitz_ = g;
  smoothness_ = weights_.maxCoeff();
  known_optimum_ = 0.0;
  DependenceSets all(static_cast<std::size_t>(agents));
  for (auto& a : all) {
    a.resize(static_cast<std::size_t>(agents));
    std::iota(a.begin(), a.end(), 0);
  }
  dependence_ = std::move(all);
}

std::vector<double> BoxQuadratic::LocalCosts(const ActionProfile& x) const {
  const Vec diff = Flatten(x) - target_;
  const Vec sq = diff.cwiseAbs2();
  std::vector<double> out(static_cast<std::size_t>(n()));
  for (int i = 0; i < n(); ++i) out[static_cast<std::size_t>(i)] = 0.5 * weights_.row(i).dot(sq);
  return out;
}

ActionProfile BoxQuadratic::Gradient(const ActionProfile& x) const {
  const Vec mean_w = weights_.colwise().mean().transpose();
  return Unflatten(mean_w.cwiseProduct(Flatten(x) - target_), dims_);
}

double BoxQuadratic::max_divergence() const {
  return 0.5 * (1.0 + target_.array().abs()).square().sum();
}

double BoxQuadratic::max_gap() const {
  const Vec mean_w = weights_.colwise().mean().transpose();
  return 0.5 * mean_w.dot((1.0 + target_.array().abs()).square().matrix());
}

double BoxQuadratic::outer_radius() const {
  double s = 0.0;
  for (const ConvexSet& set : sets_) s += set.outer_radius() * set.outer_radius();
  return std::sqrt(s);
}

double BoxQuadratic::inner_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const ConvexSet& set : sets_) r = std::min(r, set.inner_radius());
  return r;
}

// ----------------------------------------------------------------- TrigSum

TrigSum::TrigSum(int agents, int dim, int terms, std::uint64_t seed) : terms_(terms) {
  if (agents <= 0 || dim <= 0 || terms <= 0) throw ConfigError("trig_sum: sizes must be positive");
  Rng rng = MakeStream(seed, 0, StreamPurpose::kInstance);
  const int d = agents * dim;
  std::normal_distribution<double> freq(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  std::uniform_real_distribution<double> amp(0.5, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  double g = 0.0;
  double l = 0.0;
  for (int i = 0; i < agents; ++i) {
    Eigen::MatrixXd w(terms, d);
    Vec a(terms);
    Vec p(terms);
    for (int k = 0; k < terms; ++k) {
      for (int c = 0; c < d; ++c) w(k, c) = freq(rng);
      a[k] = amp(rng);
      p[k] = phase(rng);
    }
    double gi = 0.0;
    double li = 0.0;
    for (int k = 0; k < terms; ++k) {
      gi += a[k] * w.row(k).norm();
      li += a[k] * w.row(k).squaredNorm();
    }
    g = std::max(g, gi);
    l = std::max(l, li);
    frequencies_.push_back(std::move(w));
    amplitudes_.push_back(std::move(a));
    phases_.push_back(std::move(p));
  }
  dims_.assign(static_cast<std::size_t>(agents), dim);
  for (int i = 0; i < agents; ++i) sets_.push_back(ConvexSet::Whole(dim));
  lipschitz_ = g;
  smoothness_ = l;
}

std::vector<double> TrigSum::LocalCosts(const ActionProfile& x) const {
  const Vec flat = Flatten(x);
  std::vector<double> out(static_cast<std::size_t>(n()));
  for (int i = 0; i < n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Vec arg = frequencies_[k] * flat + phases_[k];
    out[k] = amplitudes_[k].dot(arg.array().cos().matrix());
  }
  return out;
}

ActionProfile TrigSum::Gradient(const ActionProfile& x) const {
  const Vec flat = Flatten(x);
  Vec g = Vec::Zero(flat.size());
  for (int i = 0; i < n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Vec arg = frequencies_[k] * flat + phases_[k];
    const Vec coeff = -amplitudes_[k].cwiseProduct(arg.array().sin().matrix());
    g += frequencies_[k].transpose() * coeff;
  }
  return Unflatten(g / static_cast<double>(n()), dims_);
}

double TrigSum::lower_bound() const {
  double s = 0.0;
  for (const Vec& a : amplitudes_) s += a.sum();
  return -s / static_cast<double>(n());
}

// --------------------------------------------------------- reference solver

namespace {

ActionProfile ProjectProfile(const Problem& problem, const ActionProfile& y) {
  ActionProfile out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = Project(problem.sets()[i], y[i]);
  return out;
}

ActionProfile Axpy(const ActionProfile& x, double alpha, const ActionProfile& g) {
  ActionProfile out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + alpha * g[i];
  return out;
}

double Dot(const ActionProfile& a, const ActionProfile& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

}  // namespace

SolveResult CentralizedSolve(const Problem& problem, int max_iterations, double tol) {
  if (!problem.has_gradient()) throw ConfigError(problem.kind() + ": reference solve needs a gradient");
  ActionProfile x(static_cast<std::size_t>(problem.n()));
  for (int i = 0; i < problem.n(); ++i) {
    x[static_cast<std::size_t>(i)] = Project(problem.sets()[static_cast<std::size_t>(i)],
                                             Vec::Zero(problem.dims()[static_cast<std::size_t>(i)]));
  }
  double fx = problem.Objective(x);
  double step = 1.0;
  SolveResult result;
  for (int it = 1; it <= max_iterations; ++it) {
    const ActionProfile g = problem.Gradient(x);
    ActionProfile candidate;
    ActionProfile diff;
    double fc = fx;
    for (int backtrack = 0; backtrack < 80; ++backtrack) {
      candidate = ProjectProfile(problem, Axpy(x, -step, g));
      diff = Axpy(candidate, -1.0, x);
      fc = problem.Objective(candidate);
      const double model = fx + Dot(g, diff) + SquaredNorm(diff) / (2.0 * step);
      if (fc <= model + 1e-14 * std::max(1.0, std::abs(fx))) break;
      step *= 0.5;
    }
    const double move = std::sqrt(SquaredNorm(diff));
    // A tiny step that still cannot lower f is the floating-point floor.
    const bool stalled = fc > fx && move < 1e-8 * std::max(1.0, std::sqrt(SquaredNorm(x)));
    if (fc <= fx) {
      x = std::move(candidate);
      fx = fc;
    }
    result.iterations = it;
    if (move < tol || stalled) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.f = fx;
  const ActionProfile g = problem.Gradient(x);
  result.stationarity = std::sqrt(SquaredNorm(Axpy(x, -1.0, ProjectProfile(problem, Axpy(x, -1.0, g)))));
  return result;
}

}  // namespace zfo
