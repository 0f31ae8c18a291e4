#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpshrink/data.hpp"
#include "mpshrink/kernels.hpp"

namespace mpshrink {

/// mpcs: constant shrinking. mpvs: variable shrinking. perceptron: the
/// classical perceptron with margin (mpcs with lambda = 0).
enum class Algo { mpcs, mpvs, perceptron };

std::string to_string(Algo a);
Algo algo_from_string(const std::string& s);

struct Hyperparams {
  double eta = 0.1;     // learning rate
  double b = 1.0;       // margin threshold
  double lambda = 0.0;  // constant shrinking strength (mpcs)
  int n = 3;            // shrinking exponent (mpvs)
  std::uint64_t lup = 1000;  // multiplicity cap
  double cbar = 1.01;        // active-set selection slack
  int nep1 = 5;
  int nep2 = 5;
  std::uint64_t max_updates = 1'000'000'000;
  double rho = 1.0;
  double delta = 0.0;
};

/// Throws InvalidParams if `hp` cannot be used with `algo` on `ds`.
/// For mpcs this includes eta*lambda < 1 and lambda*b < min_k ||y_k||^2.
void validate(const Hyperparams& hp, const Dataset& ds, Algo algo);

/// Training state. The logical weight vector is `scale * w`; only mpcs
/// uses scale != 1, so that shrinking costs O(1) instead of O(dim).
/// For mpcs the logical vector is the shrunken a^s_t, for mpvs it is a_t.
struct TrainState {
  std::vector<double> w;
  double scale = 1.0;
  std::uint64_t t = 0;
  double powersum = 0.0;  // sum_{k=1}^{t} k^n (mpvs)
  std::uint64_t updates_this_pass = 0;
  std::uint64_t total_presentations = 0;

  TrainState() = default;
  explicit TrainState(std::size_t dim) : w(dim, 0.0) {}

  double dot(const Pattern& p) const { return scale * kernels::dot_unchecked(w.data(), p); }

  std::vector<double> weights() const;
  double norm() const;
  double sq_norm() const;

  /// w <- scale * w, scale <- 1. Logical vector unchanged.
  void fold_scale();
};

/// One (possibly multiple) update as applied by a solver.
struct UpdateStep {
  std::size_t pattern_index = 0;
  std::uint64_t mu = 0;    // multiplicity, 1 <= mu <= lup
  double dot_before = 0.0;  // logical w . y_k before the update
  std::uint64_t t_before = 0;
};

struct MarginEval {
  double gamma_prime;
  std::size_t argmin_index;
};

struct MarginReport {
  double gamma_prime = 0.0;
  double norm_w = 0.0;
  std::size_t argmin_index = 0;
  double f_after = 0.0;
  double gamma_d_upper = 0.0;
};

/// gamma' = min_k (w . y_k) / ||w||, lowest index on ties.
MarginEval evaluate_margin(std::span<const double> w, const Dataset& ds);

struct DerivedParams {
  double delta_p;    // eta R^2 / b
  double epsilon_p;  // 1 - lambda b / gamma^2 (mpcs) or 1/(n+1) (mpvs)
};

/// `gamma_hat` is required for mpcs/perceptron and ignored for mpvs.
DerivedParams derived_params(Algo algo, const Hyperparams& hp, double radius,
                             std::optional<double> gamma_hat = std::nullopt);

/// Persisted weight vector plus the settings needed to rebuild the space.
struct Model {
  Algo algo = Algo::mpvs;
  Hyperparams hp;
  std::uint64_t t = 0;
  std::size_t features = 0;
  std::size_t dim = 0;
  std::vector<double> w;
  /// Extra key=value header lines (certificate, report fields).
  std::vector<std::pair<std::string, std::string>> extra;
};

void write_model(std::ostream& os, const Model& model);
Model read_model(std::istream& is);

std::string format_real(double v);

}  // namespace mpshrink
