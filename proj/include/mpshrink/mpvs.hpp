#pragma once

// Margin perceptron with variable shrinking, in its unscaled form
//
//   a_{t+1} = a_t + eta (t+1)^n y_k   whenever   a_t . y_k <= b (t+1)^n.
//
// n = 0 is the classical perceptron with margin.

#include <cstdint>

#include "mpshrink/data.hpp"
#include "mpshrink/model.hpp"

namespace mpshrink::mpvs {

/// x^n by repeated multiplication (n small).
inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

inline double threshold(std::uint64_t t, const Hyperparams& hp) {
  return hp.b * ipow(static_cast<double>(t + 1), hp.n);
}

inline bool condition(double dot, std::uint64_t t, const Hyperparams& hp) {
  return dot <= threshold(t, hp);
}

inline bool condition(const TrainState& state, const Pattern& p, const Hyperparams& hp) {
  return condition(state.dot(p), state.t, hp);
}

struct Multiplicity {
  std::uint64_t mu;
  double sum_jn;  // sum_{i=t+1}^{t+mu} i^n
};

/// Longest run of legal single updates on one pattern starting at update
/// count t, found by scanning j = 0, 1, ... and stopping at the first j
/// whose constituent update would not be a margin error. Capped at `cap`
/// (defaults to hp.lup). Requires the condition to hold at t.
Multiplicity max_multiplicity(double dot_before, double sq_norm, std::uint64_t t,
                              const Hyperparams& hp, std::uint64_t cap = 0);

inline Multiplicity max_multiplicity(const TrainState& state, const Pattern& p,
                                     const Hyperparams& hp) {
  return max_multiplicity(state.dot(p), p.sq_norm, state.t, hp);
}

/// a <- a + eta * sum_jn * y; t += mu; powersum += sum_jn.
void apply(TrainState& state, const Pattern& p, std::uint64_t mu, double sum_jn,
           const Hyperparams& hp);

}  // namespace mpshrink::mpvs
