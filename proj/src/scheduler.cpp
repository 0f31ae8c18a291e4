#include "mpshrink/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mpshrink/kernels.hpp"
#include "mpshrink/mpcs.hpp"
#include "mpshrink/mpvs.hpp"

namespace mpshrink {

double current_threshold(const TrainState& state, const Hyperparams& hp, Algo algo) {
  return algo == Algo::mpvs ? mpvs::threshold(state.t, hp) : hp.b;
}

namespace {

class Trainer {
 public:
  Trainer(const Dataset& ds, const Hyperparams& hp, Algo algo, const TrainOptions& opts)
      : ds_(ds), hp_(hp), algo_(algo), opts_(opts), state_(ds.dim) {
    if (algo_ == Algo::perceptron) hp_.lambda = 0.0;
  }

  RunResult run() {
    const auto start = std::chrono::steady_clock::now();
    RunResult out;

    std::vector<std::size_t> order(ds_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(opts_.seed);
    ActiveSets sets;

    for (;;) {
      ++out.full_passes;
      state_.updates_this_pass = 0;
      sets.level1.clear();
      pass_min_ = std::numeric_limits<double>::infinity();
      if (opts_.order == Order::shuffled) std::shuffle(order.begin(), order.end(), rng);

      for (auto k : order) {
        present(k, opts_.use_active_sets ? &sets.level1 : nullptr);
        if (budget_hit_) break;
      }
      if (opts_.on_pass) {
        const double nw = state_.norm();
        opts_.on_pass({out.full_passes, state_.t, nw > 0.0 ? pass_min_ / nw : 0.0});
      }
      if (budget_hit_) break;
      if (state_.updates_this_pass == 0) {
        out.converged = true;
        break;
      }
      if (opts_.use_active_sets) cycle_active(sets);
      if (budget_hit_) break;
    }

    if (out.converged && count_margin_errors(ds_, state_, hp_, algo_) != 0)
      throw std::logic_error("clean pass disagrees with verification pass");

    out.t_c = state_.t;
    out.presentations = state_.total_presentations;
    out.state = std::move(state_);
    out.wall_time = std::chrono::steady_clock::now() - start;
    return out;
  }

 private:
  void cycle_active(ActiveSets& sets) {
    for (int e1 = 0; e1 < hp_.nep1 && !sets.level1.empty(); ++e1) {
      std::uint64_t before = state_.t;
      sets.level2.clear();
      for (auto k : sets.level1) {
        present(k, &sets.level2);
        if (budget_hit_) return;
      }
      for (int e2 = 0; e2 < hp_.nep2 && !sets.level2.empty(); ++e2) {
        const std::uint64_t before2 = state_.t;
        for (auto k : sets.level2) {
          present(k, nullptr);
          if (budget_hit_) return;
        }
        if (state_.t == before2) break;
      }
      if (state_.t == before) break;
    }
  }

  // Presents pattern k once; selects it into `select` when it satisfies the
  // cbar-slackened condition, and updates on a margin error.
  void present(std::size_t k, std::vector<std::size_t>* select) {
    const Pattern& p = ds_.patterns[k];
    ++state_.total_presentations;
    const double dot = state_.dot(p);
    const double thr = current_threshold(state_, hp_, algo_);
    if (select != nullptr && dot <= hp_.cbar * thr) select->push_back(k);
    if (opts_.on_pass) pass_min_ = std::min(pass_min_, dot);
    if (!(dot <= thr)) return;

    if (state_.t >= hp_.max_updates) {
      budget_hit_ = true;
      return;
    }
    const std::uint64_t cap = std::min<std::uint64_t>(hp_.lup, hp_.max_updates - state_.t);
    UpdateStep step{k, 0, dot, state_.t};
    if (algo_ == Algo::mpvs) {
      const auto mult = mpvs::max_multiplicity(dot, p.sq_norm, state_.t, hp_, cap);
      step.mu = mult.mu;
      mpvs::apply(state_, p, mult.mu, mult.sum_jn, hp_);
    } else {
      step.mu = mpcs::max_multiplicity(dot, p.sq_norm, hp_, cap);
      mpcs::apply(state_, p, step.mu, hp_);
    }
    state_.updates_this_pass += step.mu;
    if (opts_.on_update) opts_.on_update(state_, step);
  }

  const Dataset& ds_;
  Hyperparams hp_;
  Algo algo_;
  const TrainOptions& opts_;
  TrainState state_;
  bool budget_hit_ = false;
  double pass_min_ = 0.0;
};

}  // namespace

RunResult train(const Dataset& ds, const Hyperparams& hp, Algo algo, const TrainOptions& opts) {
  validate(hp, ds, algo);
  return Trainer(ds, hp, algo, opts).run();
}

ActiveSets build_active_sets(const Dataset& ds, const TrainState& state, const Hyperparams& hp,
                             Algo algo) {
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double thr = hp.cbar * current_threshold(state, hp, algo);
  ActiveSets sets;
  sets.level1 = kernels::select_at_most(state.w, state.scale, ds.patterns, all, thr);
  sets.level2 = kernels::select_at_most(state.w, state.scale, ds.patterns, sets.level1, thr);
  return sets;
}

std::size_t count_margin_errors(const Dataset& ds, const TrainState& state, const Hyperparams& hp,
                                Algo algo) {
  return kernels::count_at_most(state.w, state.scale, ds.patterns,
                                current_threshold(state, hp, algo));
}

}  // namespace mpshrink
