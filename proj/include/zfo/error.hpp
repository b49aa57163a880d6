#pragma once

#include <stdexcept>
#include <string>

namespace zfo {

// Invalid user-supplied configuration (bad dimensions, out-of-range parameters,
// malformed graphs or config files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point or parameter outside the domain of an operation, e.g. evaluating a
// cost outside the feasible set.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The table protocol needed information older than the perturbation history
// retains. Means the realized staleness exceeded the delay bound.
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run broke one of the hard modelling assumptions (infeasible action,
// delay bound exceeded).
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace zfo
