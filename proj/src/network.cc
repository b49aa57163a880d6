#include "zfo/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "zfo/error.hpp"

namespace zfo {
namespace {

// BFS hop counts from `source` restricted to nodes with allowed[r]; -1 if unreachable.
std::vector<int> Bfs(const CommGraph& graph, int source, const std::vector<char>* allowed) {
  std::vector<int> dist(static_cast<std::size_t>(graph.n()), -1);
  std::queue<int> frontier;
  dist[static_cast<std::size_t>(source)] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int at = frontier.front();
    frontier.pop();
    for (int next : graph.neighbors(at)) {
      auto& d = dist[static_cast<std::size_t>(next)];
      if (d >= 0) continue;
      if (allowed != nullptr && !(*allowed)[static_cast<std::size_t>(next)]) continue;
      d = dist[static_cast<std::size_t>(at)] + 1;
      frontier.push(next);
    }
  }
  return dist;
}

bool Contains(const std::vector<int>& sorted, int value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

}  // namespace

CommGraph::CommGraph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
  if (n <= 0) throw ConfigError("graph: agent count must be positive");
  std::set<std::pair<int, int>> unique;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ConfigError("graph: edge (" + std::to_string(a + 1) + ", " + std::to_string(b + 1) +
                        ") out of range for " + std::to_string(n) + " agents");
    }
    if (a == b) throw ConfigError("graph: self-loop at agent " + std::to_string(a + 1));
    unique.emplace(std::min(a, b), std::max(a, b));
  }
  edges_.assign(unique.begin(), unique.end());
  adjacency_.resize(static_cast<std::size_t>(n));
  for (auto [a, b] : edges_) {
    adjacency_[static_cast<std::size_t>(a)].push_back(b);
    adjacency_[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

CommGraph CommGraph::FromEdgeList(std::istream& in, int n) {
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  int max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long a = 0;
    long long b = 0;
    std::string rest;
    if (!(fields >> a >> b) || (fields >> rest)) {
      throw ConfigError("edge list line " + std::to_string(line_no) + ": expected `i j`");
    }
    if (a < 1 || b < 1) {
      throw ConfigError("edge list line " + std::to_string(line_no) + ": indices are 1-based");
    }
    max_index = std::max<int>(max_index, static_cast<int>(std::max(a, b)));
    edges.emplace_back(static_cast<int>(a - 1), static_cast<int>(b - 1));
  }
  return CommGraph(n > 0 ? n : max_index, std::move(edges));
}

CommGraph CommGraph::FromEdgeListFile(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list `" + path + "`");
  return FromEdgeList(in, n);
}

void CommGraph::WriteEdgeList(std::ostream& out) const {
  for (auto [a, b] : edges_) out << a + 1 << ' ' << b + 1 << '\n';
}

CommGraph CommGraph::Path(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return CommGraph(n, std::move(edges));
}

CommGraph CommGraph::Complete(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return CommGraph(n, std::move(edges));
}

CommGraph CommGraph::Star(int n, int center) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    if (i != center) edges.emplace_back(center, i);
  }
  return CommGraph(n, std::move(edges));
}

CommGraph CommGraph::RandomConnected(int n, int min_degree, int max_degree, std::uint64_t seed) {
  if (n <= 0) throw ConfigError("random graph: agent count must be positive");
  if (min_degree < 1 || max_degree < std::max(2, min_degree)) {
    throw ConfigError("random graph: need 1 <= min_degree <= max_degree and max_degree >= 2");
  }
  if (n <= min_degree + 1) return Complete(n);

  Rng rng = MakeStream(seed, 0, StreamPurpose::kInstance);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::set<std::pair<int, int>> edges;
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  const auto add = [&](int a, int b) {
    if (a == b) return false;
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    if (edges.count(key) != 0) return false;
    if (degree[static_cast<std::size_t>(a)] >= max_degree ||
        degree[static_cast<std::size_t>(b)] >= max_degree) {
      return false;
    }
    edges.insert(key);
    ++degree[static_cast<std::size_t>(a)];
    ++degree[static_cast<std::size_t>(b)];
    return true;
  };
  for (std::size_t k = 0; k + 1 < order.size(); ++k) add(order[k], order[k + 1]);

  std::uniform_int_distribution<int> pick(0, n - 1);
  // Lift every agent to the minimum degree.
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0; degree[static_cast<std::size_t>(i)] < min_degree && attempt < 50 * n;
         ++attempt) {
      add(i, pick(rng));
    }
  }
  // A few extra random links so degrees spread over the allowed range.
  std::uniform_int_distribution<int> extra(0, n / 2);
  const int extras = extra(rng);
  for (int k = 0; k < extras; ++k) add(pick(rng), pick(rng));

  return CommGraph(n, std::vector<std::pair<int, int>>(edges.begin(), edges.end()));
}

CommGraph CommGraph::GroupChain(int groups, int per_group) {
  if (groups <= 0 || per_group <= 0) throw ConfigError("group chain: sizes must be positive");
  std::vector<std::pair<int, int>> edges;
  for (int g = 0; g < groups; ++g) {
    const int base = g * per_group;
    for (int a = 0; a < per_group; ++a) {
      for (int b = a + 1; b < per_group; ++b) edges.emplace_back(base + a, base + b);
    }
    if (g + 1 < groups) edges.emplace_back(base + per_group - 1, base + per_group);
  }
  return CommGraph(groups * per_group, std::move(edges));
}

bool CommGraph::connected() const {
  const auto dist = Bfs(*this, 0, nullptr);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

IntMatrix Distances(const CommGraph& graph) {
  const int n = graph.n();
  IntMatrix b(n, n);
  for (int i = 0; i < n; ++i) {
    const auto dist = Bfs(graph, i, nullptr);
    for (int j = 0; j < n; ++j) {
      if (dist[static_cast<std::size_t>(j)] < 0) {
        throw ConfigError("graph is disconnected: no path between agents " + std::to_string(i + 1) +
                          " and " + std::to_string(j + 1));
      }
      b(i, j) = dist[static_cast<std::size_t>(j)];
    }
  }
  return b;
}

DelayModel DelayModel::Bernoulli(double p, int delta) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("delay: drop probability must lie in [0, 1]");
  if (delta < 0) throw ConfigError("delay: delta must be nonnegative");
  return {Kind::kBernoulliDrop, p, delta};
}

NetworkStats Stats(const CommGraph& graph, std::span<const int> dims, int delta) {
  const int n = graph.n();
  if (static_cast<int>(dims.size()) != n) throw ConfigError("stats: need one dimension per agent");
  if (std::any_of(dims.begin(), dims.end(), [](int d) { return d <= 0; })) {
    throw ConfigError("stats: dimensions must be positive");
  }
  if (delta < 0) throw ConfigError("stats: delta must be nonnegative");

  NetworkStats s;
  s.b = Distances(graph);
  s.delta = delta;
  double total_dim = 0.0;
  for (int d : dims) total_dim += d;
  double plain = 0.0;
  double weighted = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double hop = static_cast<double>(s.b(i, j) + delta);
      plain += hop * hop;
      weighted += hop * hop * dims[static_cast<std::size_t>(i)];
    }
  }
  const double nn = static_cast<double>(n);
  s.b_bar = std::sqrt(plain / (nn * nn));
  s.b_frak = std::sqrt(weighted / (nn * total_dim));
  s.B = s.b.maxCoeff() + delta;
  return s;
}

DependenceSets NormalizeDependence(const DependenceSets& affected, int n) {
  if (static_cast<int>(affected.size()) != n) {
    throw ConfigError("dependence sets: expected " + std::to_string(n) + " sets, got " +
                      std::to_string(affected.size()));
  }
  DependenceSets out = affected;
  for (int i = 0; i < n; ++i) {
    auto& set = out[static_cast<std::size_t>(i)];
    for (int j : set) {
      if (j < 0 || j >= n) {
        throw ConfigError("dependence sets: A_" + std::to_string(i + 1) + " has out-of-range agent " +
                          std::to_string(j + 1));
      }
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    if (!Contains(set, i)) {
      throw ConfigError("dependence sets: A_" + std::to_string(i + 1) + " must contain agent " +
                        std::to_string(i + 1));
    }
  }
  return out;
}

CompatibilityVerdict CheckCompatibility(const CommGraph& graph, const DependenceSets& affected) {
  const int n = graph.n();
  const DependenceSets sets = NormalizeDependence(affected, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (Contains(sets[static_cast<std::size_t>(i)], j)) continue;
      // Agents relaying column j, with i removed.
      std::vector<char> allowed(static_cast<std::size_t>(n), 0);
      for (int r = 0; r < n; ++r) {
        allowed[static_cast<std::size_t>(r)] = r != i && Contains(sets[static_cast<std::size_t>(r)], j);
      }
      const auto reach = Bfs(graph, j, &allowed);
      for (int l = 0; l < n; ++l) {
        if (!Contains(sets[static_cast<std::size_t>(l)], j)) continue;
        if (reach[static_cast<std::size_t>(l)] < 0) {
          return {false, std::array<int, 3>{i, j, l}};
        }
      }
    }
  }
  return {true, std::nullopt};
}

IntMatrix ReducedDistances(const CommGraph& graph, const DependenceSets& affected) {
  const int n = graph.n();
  const DependenceSets sets = NormalizeDependence(affected, n);
  IntMatrix out = IntMatrix::Constant(n, n, -1);
  for (int j = 0; j < n; ++j) {
    std::vector<char> allowed(static_cast<std::size_t>(n), 0);
    for (int r = 0; r < n; ++r) allowed[static_cast<std::size_t>(r)] = Contains(sets[static_cast<std::size_t>(r)], j);
    const auto reach = Bfs(graph, j, &allowed);
    for (int l = 0; l < n; ++l) {
      if (allowed[static_cast<std::size_t>(l)]) out(l, j) = reach[static_cast<std::size_t>(l)];
    }
  }
  return out;
}

}  // namespace zfo
