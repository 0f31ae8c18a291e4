#include "mpshrink/mpcs.hpp"

#include <cmath>

#include "mpshrink/errors.hpp"

namespace mpshrink::mpcs {

namespace {

// Fold the lazy scale back into w before it can underflow.
constexpr double kMinScale = 1e-100;

}  // namespace

double shrink_power(double eta_lambda, double mu) { return std::exp(mu * std::log1p(-eta_lambda)); }

std::uint64_t max_multiplicity(double dot_before, double sq_norm, const Hyperparams& hp,
                               std::uint64_t cap) {
  if (cap == 0) cap = hp.lup;
  if (!(dot_before <= hp.b))
    throw InvalidParams("multiplicity requested for a pattern that is not a margin error");
  const double el = hp.eta * hp.lambda;
  if (!(el < 1.0)) throw InvalidParams("eta*lambda must be < 1");
  const double denom = sq_norm - hp.lambda * hp.b;
  if (!(denom > 0.0)) throw InvalidParams("lambda*b must be < ||y||^2");
  if (cap <= 1) return 1;

  double steps;
  if (hp.lambda == 0.0) {
    steps = (hp.b - dot_before) / (hp.eta * sq_norm);
  } else {
    steps = std::log1p(hp.lambda * (hp.b - dot_before) / denom) / -std::log1p(-el);
  }
  if (!(steps < static_cast<double>(cap))) return cap;
  const auto mu = static_cast<std::uint64_t>(std::floor(steps)) + 1;
  return mu < cap ? mu : cap;
}

void apply(TrainState& state, const Pattern& p, std::uint64_t mu, const Hyperparams& hp) {
  if (mu == 0) return;
  double coef;
  if (hp.lambda == 0.0) {
    coef = static_cast<double>(mu) * hp.eta;
  } else {
    double factor;
    if (mu == 1) {
      factor = 1.0 - hp.eta * hp.lambda;
      coef = hp.eta;
    } else {
      const double lq = std::log1p(-hp.eta * hp.lambda);
      factor = std::exp(static_cast<double>(mu) * lq);
      coef = -std::expm1(static_cast<double>(mu) * lq) / hp.lambda;
    }
    state.scale *= factor;
    if (state.scale < kMinScale) state.fold_scale();
  }
  axpy(state.scale == 1.0 ? coef : coef / state.scale, p, state.w);
  state.t += mu;
}

}  // namespace mpshrink::mpcs
