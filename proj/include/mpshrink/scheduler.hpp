#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mpshrink/data.hpp"
#include "mpshrink/model.hpp"

namespace mpshrink {

enum class Order { sequential, shuffled };

struct ActiveSets {
  std::vector<std::size_t> level1;  // indices into the dataset
  std::vector<std::size_t> level2;  // subset of level1
};

struct Progress {
  std::uint64_t pass = 0;  // full passes so far
  std::uint64_t t = 0;
  double min_margin_estimate = 0.0;  // min pre-update w.y_k / ||w|| seen in the pass
};

struct TrainOptions {
  Order order = Order::sequential;
  std::uint64_t seed = 0;
  bool use_active_sets = true;
  std::function<void(const Progress&)> on_pass;
  /// Called after every (multiple) update. Test and diagnostics hook.
  std::function<void(const TrainState&, const UpdateStep&)> on_update;
};

struct RunResult {
  bool converged = false;
  TrainState state;
  std::uint64_t t_c = 0;
  std::uint64_t full_passes = 0;
  std::uint64_t presentations = 0;
  std::chrono::duration<double> wall_time{0};
};

/// Current right-hand side of the margin-error test: b for mpcs/perceptron
/// (shrunken form), b (t+1)^n for mpvs.
double current_threshold(const TrainState& state, const Hyperparams& hp, Algo algo);

/// Trains until a full pass over every pattern makes no update
/// (converged) or the update budget hp.max_updates is exhausted.
///
/// With active sets: each full pass also collects level1, the patterns
/// with w.y_k <= cbar * threshold at presentation time. level1 is then
/// cycled nep1 times; each level1 pass collects level2 the same way and
/// level2 is cycled nep2 times. A level that makes no updates is left
/// early. Only a clean full pass declares convergence.
RunResult train(const Dataset& ds, const Hyperparams& hp, Algo algo,
                const TrainOptions& opts = {});

/// Read-only selection at a fixed state: level1 from a full scan, level2
/// from a scan of level1 (identical at a fixed state; during training
/// level2 is rebuilt from later states).
ActiveSets build_active_sets(const Dataset& ds, const TrainState& state, const Hyperparams& hp,
                             Algo algo);

/// Full-dataset verification pass: number of patterns still satisfying
/// the margin-error condition.
std::size_t count_margin_errors(const Dataset& ds, const TrainState& state, const Hyperparams& hp,
                                Algo algo);

}  // namespace mpshrink
