#pragma once

#include <stdexcept>
#include <string>

namespace mpshrink {

/// Hyperparameters or inputs that violate a documented precondition.
class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Weight / dataset dimensions that cannot be reconciled.
class DimensionMismatch : public InvalidParams {
 public:
  using InvalidParams::InvalidParams;
};

/// A training run hit its update budget before a clean full pass.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mpshrink
