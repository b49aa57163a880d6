#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zfo/geometry.hpp"
#include "zfo/rng.hpp"

namespace zfo {

using Round = std::int64_t;

// An agent's record of the freshest difference quotient it knows for each
// agent j, and the round in which agent j generated it. Only the tracked
// columns are maintained and exchanged; by default every column is tracked.
class InfoTable {
 public:
  explicit InfoTable(int n);
  InfoTable(int n, std::vector<int> tracked_columns);

  int n() const { return static_cast<int>(quotients_.size()); }
  double quotient(int j) const { return quotients_[static_cast<std::size_t>(j)]; }
  Round stamp(int j) const { return stamps_[static_cast<std::size_t>(j)]; }
  bool tracks(int j) const { return tracked_[static_cast<std::size_t>(j)] != 0; }
  const std::vector<int>& columns() const { return columns_; }
  std::size_t payload_columns() const { return columns_.size(); }

  void Set(int j, double quotient, Round stamp);

  friend bool operator==(const InfoTable&, const InfoTable&) = default;

 private:
  std::vector<double> quotients_;  // D
  std::vector<Round> stamps_;      // tau, -1 until first heard
  std::vector<int> columns_;
  std::vector<char> tracked_;
};

// Ring buffer of the agent's own past perturbation directions.
class PerturbationHistory {
 public:
  PerturbationHistory(std::size_t capacity, Eigen::Index dim);

  void Push(Round round, Vec z);
  // z(round); the zero vector for round -1. Throws ProtocolViolation if the
  // round has already been evicted (or is in the future).
  const Vec& Lookup(Round round) const;

  std::size_t capacity() const { return slots_.size(); }
  Eigen::Index dim() const { return zero_.size(); }

 private:
  std::vector<std::pair<Round, Vec>> slots_;
  Vec zero_;
};

struct AgentState {
  int id = 0;
  Vec x;
  InfoTable table;
  PerturbationHistory history;
  Rng perturbation_rng;
  // A_i when the dependence-aware estimator is used.
  std::optional<std::vector<int>> dependence;
};

// (f+ - f-) / (2u).
double TwoPointQuotient(double f_plus, double f_minus, double u);

// Records the agent's own quotient D_i = (f+ - f-)/(2u) with stamp t.
void LocalQuotient(AgentState& state, double f_plus, double f_minus, double u, Round t);

// For every tracked j != i keep the entry with the largest stamp among the
// agent's own previous entry and the received tables. Ties keep the incumbent,
// then the lowest sender id. `received` must be sorted by sender id.
void MergeTables(AgentState& state, std::span<const std::pair<int, InfoTable>> received, Round t);

// G^i(t) = (1/n) sum_j D_j z^i(tau_j), over all tracked j, or over A_i in
// dependence mode. Entries never heard from (tau = -1) contribute zero.
Vec AssembleGradient(const AgentState& state, int n, Round t);

}  // namespace zfo
