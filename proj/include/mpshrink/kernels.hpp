#pragma once

// Read-only scans over the pattern set. Each kernel has a serial reference
// version and an OpenMP version; both produce bit-identical results because
// per-pattern dot products are always summed sequentially and reductions
// are order-independent (min with lowest-index tie-break, integer counts,
// index lists compacted in ascending order).

#include <cstddef>
#include <span>
#include <vector>

#include "mpshrink/data.hpp"

namespace mpshrink::kernels {

struct MinDot {
  double value;
  std::size_t index;
};

/// Dot product without the range check; callers guarantee w covers the pattern.
inline double dot_unchecked(const double* w, const Pattern& p) {
  double s = 0.0;
  for (const auto& f : p.features) s += w[f.index] * f.value;
  return s;
}

namespace serial {
MinDot min_dot(std::span<const double> w, double scale, std::span<const Pattern> patterns);
std::size_t count_at_most(std::span<const double> w, double scale,
                          std::span<const Pattern> patterns, double threshold);
std::vector<std::size_t> select_at_most(std::span<const double> w, double scale,
                                        std::span<const Pattern> patterns,
                                        std::span<const std::size_t> candidates, double threshold);
}  // namespace serial

namespace omp {
MinDot min_dot(std::span<const double> w, double scale, std::span<const Pattern> patterns);
std::size_t count_at_most(std::span<const double> w, double scale,
                          std::span<const Pattern> patterns, double threshold);
std::vector<std::size_t> select_at_most(std::span<const double> w, double scale,
                                        std::span<const Pattern> patterns,
                                        std::span<const std::size_t> candidates, double threshold);
}  // namespace omp

/// Thread count used by the dispatching entry points below. 1 forces the
/// serial path.
void set_threads(int n);
int threads();

/// Reads MPSHRINK_THREADS (if set) and applies it.
void configure_threads_from_env();

/// min_k scale * (w . y_k), lowest index on ties.
MinDot min_dot(std::span<const double> w, double scale, std::span<const Pattern> patterns);

/// Number of patterns with scale * (w . y_k) <= threshold.
std::size_t count_at_most(std::span<const double> w, double scale,
                          std::span<const Pattern> patterns, double threshold);

/// Candidates (ascending order preserved) with scale * (w . y_k) <= threshold.
std::vector<std::size_t> select_at_most(std::span<const double> w, double scale,
                                        std::span<const Pattern> patterns,
                                        std::span<const std::size_t> candidates, double threshold);

}  // namespace mpshrink::kernels
