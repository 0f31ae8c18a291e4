#include "mpshrink/mpvs.hpp"

#include "mpshrink/errors.hpp"

namespace mpshrink::mpvs {

Multiplicity max_multiplicity(double dot_before, double sq_norm, std::uint64_t t,
                              const Hyperparams& hp, std::uint64_t cap) {
  if (cap == 0) cap = hp.lup;
  if (!condition(dot_before, t, hp))
    throw InvalidParams("multiplicity requested for a pattern that is not a margin error");

  // Step j is legal iff dot + eta*||y||^2 * S_j <= b (t+j+1)^n, where
  // S_j = sum_{i=t+1}^{t+j} i^n. Step 0 is the precondition.
  const double gain = hp.eta * sq_norm;
  double sum = 0.0;
  std::uint64_t mu = 0;
  while (mu < cap) {
    const double pw = ipow(static_cast<double>(t + mu + 1), hp.n);
    if (!(dot_before + gain * sum <= hp.b * pw)) break;
    sum += pw;
    ++mu;
  }
  return {mu, sum};
}

void apply(TrainState& state, const Pattern& p, std::uint64_t mu, double sum_jn,
           const Hyperparams& hp) {
  if (mu == 0) return;
  const double coef = hp.eta * sum_jn;
  axpy(state.scale == 1.0 ? coef : coef / state.scale, p, state.w);
  state.t += mu;
  state.powersum += sum_jn;
}

}  // namespace mpshrink::mpvs
