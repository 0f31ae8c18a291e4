#pragma once

// Ground truth for small problems. The maximum directional margin
//   gamma_d = max_{||u||=1} min_k u . y_k
// equals the distance from the origin to the convex hull of the patterns
// when the origin lies outside it, so it is computed here as a
// minimum-norm-point problem, sharing no code with the solvers.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mpshrink/data.hpp"
#include "mpshrink/model.hpp"
#include "mpshrink/scheduler.hpp"

namespace mpshrink::oracle {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GammaResult {
  double gamma_d = 0.0;        // ||p*||; 0 when the origin is in the hull
  double gamma_lower = 0.0;    // min_k u . y_k for the returned u
  std::vector<double> u;       // unit witness direction (empty if not separable)
  double gap = 0.0;            // gamma_d - gamma_lower
  bool separable = false;
  std::size_t iterations = 0;
  std::vector<std::size_t> support;
  std::vector<double> coefficients;  // convex weights over `support`
};

struct GammaOptions {
  double rel_tol = 1e-10;  // stop when the gap is <= rel_tol * R
  std::size_t max_iterations = 100000;
};

/// Wolfe's minimum-norm-point iteration: each major cycle adds the vertex
/// minimizing its dot product with the current point, each minor cycle
/// moves to the affine minimizer of the current support set while staying
/// inside the hull. Throws OracleError when the gap cannot be closed.
GammaResult exact_gamma_d(const Dataset& ds, const GammaOptions& opts = {});

/// Enumerates every affinely independent support subset (m <= 16); the
/// answer is the smallest affine minimizer with non-negative weights.
GammaResult exhaustive_gamma_d(const Dataset& ds);

struct ReferenceRun {
  RunResult result;                 // state.w holds the literal weight vector
  std::vector<std::size_t> trace;   // pattern index of every single update
  double peak_norm = 0.0;           // largest ||w|| seen along the way
};

/// Strictly single updates in dataset order, no active sets, literal forms:
///   perceptron: w += eta y            if w.y <= b
///   mpcs:       a += eta q^{-t} y     if a.y <= b q^{-(t-1)},  q = 1 - eta lambda
///   mpvs:       a += eta (t+1)^n y    if a.y <= b (t+1)^n
/// Limited to m <= 10^4.
ReferenceRun reference_train(const Dataset& ds, const Hyperparams& hp, Algo algo);

}  // namespace mpshrink::oracle
