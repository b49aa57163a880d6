#pragma once

#include <algorithm>
#include <array>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "zfo/rng.hpp"

namespace zfo {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// Undirected communication graph on agents 0..n-1. Self-loops are rejected,
// repeated edges merged; connectivity is checked by Distances().
class CommGraph {
 public:
  CommGraph(int n, std::vector<std::pair<int, int>> edges);

  // Edge list text, one "i j" pair per line, 1-indexed. Blank lines and
  // lines starting with '#' are skipped. n defaults to the largest index.
  static CommGraph FromEdgeList(std::istream& in, int n = 0);
  static CommGraph FromEdgeListFile(const std::string& path, int n = 0);
  void WriteEdgeList(std::ostream& out) const;

  static CommGraph Path(int n);
  static CommGraph Complete(int n);
  static CommGraph Star(int n, int center);
  // Random connected graph with degrees in [min_degree, max_degree] where the
  // size allows it: a random Hamiltonian path plus random extra edges.
  static CommGraph RandomConnected(int n, int min_degree, int max_degree, std::uint64_t seed);
  // Cliques of `per_group` agents joined in a chain by one edge between
  // consecutive groups.
  static CommGraph GroupChain(int groups, int per_group);

  int n() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }
  bool connected() const;

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;  // i < j, sorted
  std::vector<std::vector<int>> adjacency_;  // sorted
};

// All-pairs hop distances by BFS. Throws ConfigError naming a disconnected pair.
IntMatrix Distances(const CommGraph& graph);

struct DelayModel {
  enum class Kind { kNone, kBernoulliDrop };
  Kind kind = Kind::kNone;
  // Per-link, per-round drop probability (BernoulliDrop only).
  double drop_probability = 0.0;
  // Configured extra-delay bound Delta. Not enforced, only compared against.
  int delta = 0;

  static DelayModel None(int delta = 0) { return {Kind::kNone, 0.0, delta}; }
  static DelayModel Bernoulli(double p, int delta);
};

struct NetworkStats {
  IntMatrix b;
  double b_bar = 0.0;   // RMS of b_ij + Delta over all ordered pairs
  double b_frak = 0.0;  // same, weighted by d_i
  int B = 0;            // max b_ij + Delta
  int delta = 0;
};

NetworkStats Stats(const CommGraph& graph, std::span<const int> dims, int delta);

// Round-synchronous message transport. Messages posted during round t are
// delivered by the DeliverRound() call of round t + 1, each one independently
// dropped according to the delay model.
template <class Message>
class Mailboxes {
 public:
  using Inbox = std::vector<std::pair<int, Message>>;  // (sender, message), sender-sorted

  explicit Mailboxes(const CommGraph& graph) : graph_(&graph), pending_(graph.n()) {}

  // Posts a copy of `message` on every link out of `from`.
  void Send(int from, const Message& message) {
    for (int to : graph_->neighbors(from)) pending_[static_cast<std::size_t>(to)].emplace_back(from, message);
  }

  std::vector<Inbox> DeliverRound(const DelayModel& model, Rng& rng) {
    std::vector<Inbox> delivered(pending_.size());
    std::bernoulli_distribution drop(model.kind == DelayModel::Kind::kBernoulliDrop
                                         ? model.drop_probability
                                         : 0.0);
    for (std::size_t to = 0; to < pending_.size(); ++to) {
      auto& incoming = pending_[to];
      std::stable_sort(incoming.begin(), incoming.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto& [from, message] : incoming) {
        if (model.kind == DelayModel::Kind::kBernoulliDrop && drop(rng)) continue;
        delivered[to].emplace_back(from, std::move(message));
      }
      incoming.clear();
    }
    return delivered;
  }

 private:
  const CommGraph* graph_;
  std::vector<Inbox> pending_;
};

// Dependence sets: affected[i] lists the agents j whose cost f_j depends on
// agent i's action. Must contain i itself.
using DependenceSets = std::vector<std::vector<int>>;

struct CompatibilityVerdict {
  bool compatible = true;
  // (i, j, l): j ∈ A_l \ A_i but every l–j path through agents tracking j
  // passes through i.
  std::optional<std::array<int, 3>> witness;
};

// Checks whether agents may keep only the columns of their own dependence set:
// for each j ∈ A_l \ A_i there must be an l–j path avoiding i on which every
// agent r has j ∈ A_r.
CompatibilityVerdict CheckCompatibility(const CommGraph& graph, const DependenceSets& affected);

// Sorted, de-duplicated copy; throws ConfigError on out-of-range ids or i ∉ A_i.
DependenceSets NormalizeDependence(const DependenceSets& affected, int n);

// Staleness of agent l's entry for j when only agents with j ∈ A_r relay
// column j: hop distance from l to j inside that induced subgraph. -1 for
// untracked or unreachable pairs.
IntMatrix ReducedDistances(const CommGraph& graph, const DependenceSets& affected);

}  // namespace zfo
