#pragma once

// Convergence and margin guarantees for the two shrinking perceptrons:
// before-run bounds on the number of updates and on the achieved margin
// fraction f = gamma'/gamma_d, after-run certificates computed from a
// finished run, the accuracy parameterizations, the staged choice of
// lambda, and direct checks of the power-sum inequalities the variable
// shrinking analysis rests on.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpshrink/data.hpp"
#include "mpshrink/model.hpp"
#include "mpshrink/scheduler.hpp"

namespace mpshrink::certify {

struct McpsBounds {
  double t_upper;
  double f_before;
  double delta_p;
  double epsilon_p;
};

/// Update-count and margin-fraction bounds for constant shrinking. Requires
/// delta <= 2 and delta/(2+delta) < epsilon < 1, throws InvalidParams
/// naming the failed inequality otherwise. lambda == 0 is the classical
/// perceptron with margin and uses its own bounds:
/// t <= (1 + 2/delta) R^2/gamma^2, f > 1/(2+delta).
McpsBounds mpcs_bounds(double radius, double gamma_d, double eta, double b, double lambda);

/// lambda (b/gamma^2) (eta R^2/b + 2(1 - eta lambda)) / (2 - eta lambda).
/// The update bound is finite only when this is < 1.
double cal_a(double radius, double gamma_d, double eta, double b, double lambda);

struct MpvsBounds {
  double t_upper;
  double t_lower;
  double f_before;
};

MpvsBounds mpvs_bounds(double radius, double gamma_d, double eta, double b, int n);

struct AfterRun {
  double f_after;
  double gamma_d_upper;
};

/// After-run lower bound on f for constant shrinking, from the shrunken
/// weight norm:  f >= (1 - q^t) gamma' / (lambda ||a^s||),  q = 1 - eta lambda.
/// With lambda == 0 it is eta t gamma' / ||a||.
AfterRun mpcs_after_run(std::uint64_t t_c, double norm_shrunk, double gamma_prime, double eta,
                        double lambda);

/// f >= eta (sum_{k<=t} k^n) gamma' / ||a_t||.
AfterRun mpvs_after_run(double powersum, double norm_a, double gamma_prime, double eta);

struct McpsAccuracy {
  double eta;
  double lambda;
  double delta_p;
  double epsilon_p;
};

/// Single-parameter choice with f > 1 - zeta: delta = 2 zeta,
/// epsilon = delta (1+delta)/(2+delta). Needs 0 < zeta < 1/sqrt(2).
McpsAccuracy accuracy_params_mpcs(double zeta, double radius, double b, double gamma_hat);

struct MpvsAccuracy {
  double eta;
  int n;
};

/// delta = epsilon: eta = epsilon b / R^2, n = ceil(1/epsilon) - 1.
MpvsAccuracy accuracy_params_mpvs(double epsilon, double radius, double b);

struct Certificate {
  std::optional<double> t_bound_upper;
  std::optional<double> t_bound_lower;
  std::optional<double> f_before;
  double f_after = 0.0;
  double gamma_prime = 0.0;
  double gamma_d_upper = 0.0;
  std::optional<double> f_vs_oracle;
  double delta_p = 0.0;
  double epsilon_p = 0.0;
};

/// Certificate for a finished run. With `gamma_d` (an oracle value) the
/// before-run bounds use it; otherwise they use the certified interval
/// [gamma', gamma_d_upper] in the direction that keeps each bound valid.
Certificate certify_run(const Dataset& ds, const Hyperparams& hp, Algo algo, const RunResult& run,
                        std::optional<double> gamma_d = std::nullopt);

std::vector<std::pair<std::string, std::string>> certificate_fields(const Certificate& c);

struct LemmaSide {
  double lhs;
  double rhs;
  bool holds;  // decided in exact integer arithmetic
};

struct LemmaCheck {
  LemmaSide lemma1;  // (n+1) S_n <= t (t+1)^n
  LemmaSide lemma2;  // (n+1) S_n >= (t+1)^{n+1} - ((n+1)^2/(2n+1)) (t+1)^n
  LemmaSide lemma3;  // (2n+1) t S_{2n} <= (n+1)^2 S_n^2
};

/// S_p = sum_{k=1}^{t} k^p by direct summation.
LemmaCheck lemma_check(int n, std::uint64_t t);

/// All three inequalities for every t in [1, t_max] at fixed n, summing
/// incrementally. Returns the first t that fails, 0 if none does.
std::uint64_t lemma_sweep(int n, std::uint64_t t_max);

struct Stage {
  int index = 0;
  double lambda = 0.0;
  double eta = 0.0;
  std::uint64_t t_c = 0;
  double gamma_prime = 0.0;
  double f_after = 0.0;
  double gamma_d_upper = 0.0;
  double gamma_bar = 0.0;  // lower bound on gamma_d fed into this stage
};

struct StagedResult {
  RunResult run;       // the stage with the best certified f_after
  Certificate cert;
  Hyperparams hp;      // its hyperparameters
  std::vector<Stage> stages;
  bool reached = false;
};

/// Repeated constant-shrinking runs: stage 0 uses lambda = 0; each later
/// stage sets lambda = (2/(2+delta)) gbar^2 / b with gbar the best margin
/// achieved so far. Stops once f_after >= target_f. If f_after improves by
/// less than 1e-4 over a stage, eta is halved for the next one. Throws
/// BudgetExhausted if any stage fails to converge.
StagedResult staged_lambda(const Dataset& ds, const Hyperparams& hp_base, double target_f,
                           int max_stages, const TrainOptions& opts = {});

/// Fixed-shape runs with eta halved until f_after >= target_f.
StagedResult decreasing_eta(const Dataset& ds, const Hyperparams& hp_base, Algo algo,
                            double target_f, int max_stages, const TrainOptions& opts = {});

}  // namespace mpshrink::certify
