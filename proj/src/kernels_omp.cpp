#include <omp.h>

#include <cstdlib>
#include <limits>

#include "mpshrink/kernels.hpp"

namespace mpshrink::kernels {

namespace omp {

MinDot min_dot(std::span<const double> w, double scale, std::span<const Pattern> patterns) {
  MinDot best{std::numeric_limits<double>::infinity(), 0};
  const auto m = static_cast<std::ptrdiff_t>(patterns.size());
#pragma omp parallel
  {
    MinDot local{std::numeric_limits<double>::infinity(), 0};
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t k = 0; k < m; ++k) {
      const double v = scale * dot_unchecked(w.data(), patterns[k]);
      if (v < local.value) local = {v, static_cast<std::size_t>(k)};
    }
#pragma omp critical(mpshrink_min_dot)
    {
      if (local.value < best.value || (local.value == best.value && local.index < best.index))
        best = local;
    }
  }
  return best;
}

std::size_t count_at_most(std::span<const double> w, double scale,
                          std::span<const Pattern> patterns, double threshold) {
  std::size_t n = 0;
  const auto m = static_cast<std::ptrdiff_t>(patterns.size());
#pragma omp parallel for schedule(static) reduction(+ : n)
  for (std::ptrdiff_t k = 0; k < m; ++k)
    if (scale * dot_unchecked(w.data(), patterns[k]) <= threshold) ++n;
  return n;
}

std::vector<std::size_t> select_at_most(std::span<const double> w, double scale,
                                        std::span<const Pattern> patterns,
                                        std::span<const std::size_t> candidates, double threshold) {
  const auto c = static_cast<std::ptrdiff_t>(candidates.size());
  std::vector<unsigned char> keep(candidates.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < c; ++i)
    keep[i] = scale * dot_unchecked(w.data(), patterns[candidates[i]]) <= threshold;
  std::vector<std::size_t> out;
  for (std::ptrdiff_t i = 0; i < c; ++i)
    if (keep[i]) out.push_back(candidates[i]);
  return out;
}

}  // namespace omp

namespace {

int g_threads = 1;

// Below this many patterns the fork/join overhead dominates.
constexpr std::size_t kParallelMin = 2048;

bool use_parallel(std::size_t n) { return g_threads > 1 && n >= kParallelMin; }

}  // namespace

void set_threads(int n) {
  g_threads = n < 1 ? 1 : n;
  omp_set_num_threads(g_threads);
}

int threads() { return g_threads; }

void configure_threads_from_env() {
  if (const char* env = std::getenv("MPSHRINK_THREADS")) {
    const int n = std::atoi(env);
    set_threads(n > 0 ? n : omp_get_max_threads());
  }
}

MinDot min_dot(std::span<const double> w, double scale, std::span<const Pattern> patterns) {
  return use_parallel(patterns.size()) ? omp::min_dot(w, scale, patterns)
                                       : serial::min_dot(w, scale, patterns);
}

std::size_t count_at_most(std::span<const double> w, double scale,
                          std::span<const Pattern> patterns, double threshold) {
  return use_parallel(patterns.size()) ? omp::count_at_most(w, scale, patterns, threshold)
                                       : serial::count_at_most(w, scale, patterns, threshold);
}

std::vector<std::size_t> select_at_most(std::span<const double> w, double scale,
                                        std::span<const Pattern> patterns,
                                        std::span<const std::size_t> candidates, double threshold) {
  return use_parallel(candidates.size())
             ? omp::select_at_most(w, scale, patterns, candidates, threshold)
             : serial::select_at_most(w, scale, patterns, candidates, threshold);
}

}  // namespace mpshrink::kernels
