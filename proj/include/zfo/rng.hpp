#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace zfo {

using Rng = std::mt19937_64;

// What a random stream is used for. Streams for distinct purposes are
// independent even for the same agent.
enum class StreamPurpose : std::uint32_t {
  kPerturbation = 1,
  kNoise = 2,
  kNetwork = 3,
  kInstance = 4,
};

// Stream keyed by (master seed, agent id, purpose). Scheduling-independent:
// the same key always yields the same sequence.
inline Rng MakeStream(std::uint64_t master_seed, std::uint64_t agent, StreamPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(agent), static_cast<std::uint32_t>(agent >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

inline Eigen::VectorXd StandardGaussian(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = normal(rng);
  return v;
}

}  // namespace zfo
