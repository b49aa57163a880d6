#include "zfo/agent.hpp"

#include <algorithm>
#include <string>

#include "zfo/error.hpp"

namespace zfo {

InfoTable::InfoTable(int n) : quotients_(n, 0.0), stamps_(n, -1), tracked_(n, 1) {
  columns_.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) columns_[static_cast<std::size_t>(j)] = j;
}

InfoTable::InfoTable(int n, std::vector<int> tracked_columns)
    : quotients_(n, 0.0), stamps_(n, -1), columns_(std::move(tracked_columns)), tracked_(n, 0) {
  std::sort(columns_.begin(), columns_.end());
  columns_.erase(std::unique(columns_.begin(), columns_.end()), columns_.end());
  for (int j : columns_) {
    if (j < 0 || j >= n) throw ConfigError("info table: column out of range");
    tracked_[static_cast<std::size_t>(j)] = 1;
  }
}

void InfoTable::Set(int j, double quotient, Round stamp) {
  if (!tracks(j)) throw InternalError("info table: write to untracked column " + std::to_string(j));
  quotients_[static_cast<std::size_t>(j)] = quotient;
  stamps_[static_cast<std::size_t>(j)] = stamp;
}

PerturbationHistory::PerturbationHistory(std::size_t capacity, Eigen::Index dim)
    : slots_(capacity, {Round{-1}, Vec::Zero(dim)}), zero_(Vec::Zero(dim)) {
  if (capacity == 0) throw ConfigError("perturbation history: capacity must be positive");
}

void PerturbationHistory::Push(Round round, Vec z) {
  if (round < 0) throw InternalError("perturbation history: negative round");
  auto& slot = slots_[static_cast<std::size_t>(round) % slots_.size()];
  slot.first = round;
  slot.second = std::move(z);
}

const Vec& PerturbationHistory::Lookup(Round round) const {
  if (round == -1) return zero_;
  if (round >= 0) {
    const auto& slot = slots_[static_cast<std::size_t>(round) % slots_.size()];
    if (slot.first == round) return slot.second;
  }
  throw ProtocolViolation("perturbation for round " + std::to_string(round) +
                          " is outside the history window of " + std::to_string(slots_.size()) +
                          " rounds");
}

double TwoPointQuotient(double f_plus, double f_minus, double u) {
  if (!(u > 0.0)) throw ConfigError("difference quotient: u must be positive");
  return (f_plus - f_minus) / (2.0 * u);
}

void LocalQuotient(AgentState& state, double f_plus, double f_minus, double u, Round t) {
  state.table.Set(state.id, TwoPointQuotient(f_plus, f_minus, u), t);
}

void MergeTables(AgentState& state, std::span<const std::pair<int, InfoTable>> received, Round) {
  InfoTable& table = state.table;
  for (int j : table.columns()) {
    if (j == state.id) continue;
    double best_quotient = table.quotient(j);
    Round best_stamp = table.stamp(j);
    for (const auto& [sender, offered] : received) {
      if (!offered.tracks(j)) continue;
      if (offered.stamp(j) > best_stamp) {
        best_stamp = offered.stamp(j);
        best_quotient = offered.quotient(j);
      }
    }
    table.Set(j, best_quotient, best_stamp);
  }
}

Vec AssembleGradient(const AgentState& state, int n, Round) {
  const InfoTable& table = state.table;
  Vec g = Vec::Zero(state.history.dim());
  const std::vector<int>& terms = state.dependence ? *state.dependence : table.columns();
  for (int j : terms) {
    if (!table.tracks(j)) {
      throw InternalError("gradient assembly: dependence column " + std::to_string(j) +
                          " is not tracked");
    }
    const Round stamp = table.stamp(j);
    if (stamp < 0) continue;
    g += table.quotient(j) * state.history.Lookup(stamp);
  }
  return g / static_cast<double>(n);
}

}  // namespace zfo
