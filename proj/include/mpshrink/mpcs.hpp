#pragma once

// Margin perceptron with constant shrinking, in the shrunken representation
//
//   a^s <- (1 - eta*lambda) a^s + eta y_k   whenever   a^s . y_k <= b.
//
// The shrunken vector has bounded norm, unlike the equivalent unscaled
// form whose length grows like (1 - eta*lambda)^-t. lambda = 0 is the
// classical perceptron with margin.

#include <cstdint>

#include "mpshrink/data.hpp"
#include "mpshrink/model.hpp"

namespace mpshrink::mpcs {

inline bool condition(double dot, const Hyperparams& hp) { return dot <= hp.b; }

inline bool condition(const TrainState& state, const Pattern& p, const Hyperparams& hp) {
  return condition(state.dot(p), hp);
}

/// Largest number of consecutive single updates on one pattern that are all
/// margin errors, capped at `cap` (defaults to hp.lup). Requires
/// dot_before <= b and sq_norm > lambda*b.
std::uint64_t max_multiplicity(double dot_before, double sq_norm, const Hyperparams& hp,
                               std::uint64_t cap = 0);

/// Applies mu chained single updates in closed form:
///   a^s <- q^mu a^s + ((1 - q^mu)/lambda) y,  q = 1 - eta*lambda.
void apply(TrainState& state, const Pattern& p, std::uint64_t mu, const Hyperparams& hp);

/// (1 - eta*lambda)^mu via exp/log1p.
double shrink_power(double eta_lambda, double mu);

}  // namespace mpshrink::mpcs
