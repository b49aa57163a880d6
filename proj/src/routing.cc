#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "zfo/error.hpp"
#include "zfo/problems.hpp"

namespace zfo {
namespace {

std::vector<double> RouteLoads(const RoutingInstance& inst, const std::vector<Vec>& v) {
  std::vector<double> q(static_cast<std::size_t>(inst.m), 0.0);
  for (int i = 0; i < inst.n(); ++i) {
    const auto& routes = inst.routes[static_cast<std::size_t>(i)];
    const double traffic = inst.traffic[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < routes.size(); ++k) {
      q[static_cast<std::size_t>(routes[k])] += v[static_cast<std::size_t>(i)][static_cast<Eigen::Index>(k)] * traffic;
    }
  }
  return q;
}

std::vector<double> AgentCosts(const RoutingInstance& inst, const std::vector<Vec>& v,
                               const std::vector<double>& q) {
  std::vector<double> f(static_cast<std::size_t>(inst.n()), 0.0);
  for (int i = 0; i < inst.n(); ++i) {
    const auto& routes = inst.routes[static_cast<std::size_t>(i)];
    const double traffic = inst.traffic[static_cast<std::size_t>(i)];
    double cost = 0.0;
    for (std::size_t k = 0; k < routes.size(); ++k) {
      const auto r = static_cast<std::size_t>(routes[k]);
      cost += v[static_cast<std::size_t>(i)][static_cast<Eigen::Index>(k)] * traffic * inst.congestion[r](q[r]);
    }
    f[static_cast<std::size_t>(i)] = cost;
  }
  return f;
}

}  // namespace

void RoutingInstance::Validate() const {
  if (m <= 0) throw ConfigError("routing: no routes");
  if (traffic.size() != routes.size()) throw ConfigError("routing: one traffic value per agent");
  if (static_cast<int>(congestion.size()) != m) throw ConfigError("routing: one congestion function per route");
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (routes[i].size() < 2) throw ConfigError("routing: agent " + std::to_string(i + 1) + " needs at least 2 routes");
    for (int r : routes[i]) {
      if (r < 0 || r >= m) throw ConfigError("routing: route id out of range");
      used[static_cast<std::size_t>(r)] = 1;
    }
    if (traffic[i] < 0.0) throw ConfigError("routing: negative traffic");
  }
  for (int r = 0; r < m; ++r) {
    if (!used[static_cast<std::size_t>(r)]) throw ConfigError("routing: route " + std::to_string(r + 1) + " unused");
    const Congestion& c = congestion[static_cast<std::size_t>(r)];
    if (c.a < 0.0 || c.b < 0.0 || c.c < 0.0) throw ConfigError("routing: negative congestion coefficient");
  }
}

RoutingInstance BuildRouting(const RoutingSpec& spec) {
  if (spec.n_groups < 2) throw ConfigError("routing: n_groups must be at least 2");
  if (spec.agents_per_group < 1) throw ConfigError("routing: agents_per_group must be positive");
  RoutingInstance inst;
  inst.n_groups = spec.n_groups;
  inst.agents_per_group = spec.agents_per_group;
  inst.m = 2 * spec.n_groups + 2;
  for (int g = 0; g < spec.n_groups; ++g) {
    for (int a = 0; a < spec.agents_per_group; ++a) {
      inst.routes.push_back({2 * g, 2 * g + 1, 2 * g + 2, 2 * g + 3});
    }
  }
  // N(mean, variance) with the variances 0.2 and 0.8.
  Rng rng = MakeStream(spec.seed, 0, StreamPurpose::kInstance);
  std::normal_distribution<double> traffic(1.0, std::sqrt(0.2));
  std::normal_distribution<double> coeff(0.0, std::sqrt(0.8));
  for (int i = 0; i < inst.n(); ++i) inst.traffic.push_back(std::abs(traffic(rng)));
  for (int r = 0; r < inst.m; ++r) {
    Congestion c;
    c.a = std::abs(coeff(rng));
    c.b = std::abs(coeff(rng));
    c.c = std::abs(coeff(rng));
    inst.congestion.push_back(c);
  }
  inst.Validate();
  return inst;
}

RoutingCosts EvaluateRouting(const RoutingInstance& inst, const std::vector<Vec>& v) {
  if (static_cast<int>(v.size()) != inst.n()) throw DomainError("routing: one allocation per agent");
  for (int i = 0; i < inst.n(); ++i) {
    const Vec& vi = v[static_cast<std::size_t>(i)];
    if (vi.size() != static_cast<Eigen::Index>(inst.routes[static_cast<std::size_t>(i)].size())) {
      throw DomainError("routing: allocation of agent " + std::to_string(i + 1) + " has wrong length");
    }
    if (vi.minCoeff() < -kMembershipTol || std::abs(vi.sum() - 1.0) > kMembershipTol) {
      throw DomainError("routing: allocation of agent " + std::to_string(i + 1) + " is off the simplex");
    }
  }
  const std::vector<double> q = RouteLoads(inst, v);
  RoutingCosts out;
  out.per_agent = AgentCosts(inst, v, q);
  const double n = static_cast<double>(inst.n());
  for (double f : out.per_agent) out.global += f;
  out.global /= n;
  for (int r = 0; r < inst.m; ++r) {
    const auto k = static_cast<std::size_t>(r);
    out.global_by_route += q[k] * inst.congestion[k](q[k]);
  }
  out.global_by_route /= n;
  return out;
}

ConvexSet RoutingReducedSet(int route_count) {
  if (route_count < 2) throw ConfigError("routing: need at least 2 routes per agent");
  return ConvexSet::MakeSimplex(Vec::Constant(route_count - 1, -1.0 / route_count));
}

ActionProfile RoutingReparam(const RoutingInstance& inst, const std::vector<Vec>& v) {
  ActionProfile x;
  x.reserve(v.size());
  for (int i = 0; i < inst.n(); ++i) {
    const Vec& vi = v[static_cast<std::size_t>(i)];
    const double k = static_cast<double>(vi.size());
    x.push_back((vi.head(vi.size() - 1).array() - 1.0 / k).matrix());
  }
  return x;
}

std::vector<Vec> RoutingRecover(const RoutingInstance& inst, const ActionProfile& x) {
  std::vector<Vec> v;
  v.reserve(x.size());
  for (int i = 0; i < inst.n(); ++i) {
    const Vec& xi = x[static_cast<std::size_t>(i)];
    const Eigen::Index k = xi.size() + 1;
    Vec vi(k);
    vi.head(k - 1) = (xi.array() + 1.0 / static_cast<double>(k)).matrix();
    vi[k - 1] = 1.0 - vi.head(k - 1).sum();
    v.push_back(std::move(vi));
  }
  return v;
}

DependenceSets RoutingDependence(const RoutingInstance& inst) {
  const int n = inst.n();
  DependenceSets deps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& ri = inst.routes[static_cast<std::size_t>(i)];
      const auto& rj = inst.routes[static_cast<std::size_t>(j)];
      bool shared = false;
      for (int r : ri) {
        if (std::find(rj.begin(), rj.end(), r) != rj.end()) {
          shared = true;
          break;
        }
      }
      if (shared) deps[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return deps;
}

RoutingProblem::RoutingProblem(RoutingInstance inst) : inst_(std::move(inst)) {
  inst_.Validate();
  for (const auto& routes : inst_.routes) {
    const int k = static_cast<int>(routes.size());
    dims_.push_back(k - 1);
    sets_.push_back(RoutingReducedSet(k));
  }
  dependence_ = RoutingDependence(inst_);
}

std::vector<double> RoutingProblem::LocalCosts(const ActionProfile& x) const {
  const std::vector<Vec> v = RoutingRecover(inst_, x);
  return AgentCosts(inst_, v, RouteLoads(inst_, v));
}

ActionProfile RoutingProblem::Gradient(const ActionProfile& x) const {
  const std::vector<Vec> v = RoutingRecover(inst_, x);
  const std::vector<double> q = RouteLoads(inst_, v);
  const double n = static_cast<double>(inst_.n());
  ActionProfile g;
  g.reserve(x.size());
  for (int i = 0; i < inst_.n(); ++i) {
    const auto& routes = inst_.routes[static_cast<std::size_t>(i)];
    const double traffic = inst_.traffic[static_cast<std::size_t>(i)];
    // d f / d v^i_r = Q_i (c_r(q_r) + q_r c_r'(q_r)) / n
    Vec dv(static_cast<Eigen::Index>(routes.size()));
    for (std::size_t k = 0; k < routes.size(); ++k) {
      const auto r = static_cast<std::size_t>(routes[k]);
      const Congestion& c = inst_.congestion[r];
      dv[static_cast<Eigen::Index>(k)] = traffic * (c(q[r]) + q[r] * c.derivative(q[r])) / n;
    }
    const Eigen::Index last = dv.size() - 1;
    g.push_back((dv.head(last).array() - dv[last]).matrix());
  }
  return g;
}

}  // namespace zfo
