#include <limits>

#include "mpshrink/kernels.hpp"

namespace mpshrink::kernels::serial {

MinDot min_dot(std::span<const double> w, double scale, std::span<const Pattern> patterns) {
  MinDot best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    const double v = scale * dot_unchecked(w.data(), patterns[k]);
    if (v < best.value) best = {v, k};
  }
  return best;
}

std::size_t count_at_most(std::span<const double> w, double scale,
                          std::span<const Pattern> patterns, double threshold) {
  std::size_t n = 0;
  for (const auto& p : patterns)
    if (scale * dot_unchecked(w.data(), p) <= threshold) ++n;
  return n;
}

std::vector<std::size_t> select_at_most(std::span<const double> w, double scale,
                                        std::span<const Pattern> patterns,
                                        std::span<const std::size_t> candidates, double threshold) {
  std::vector<std::size_t> out;
  for (auto k : candidates)
    if (scale * dot_unchecked(w.data(), patterns[k]) <= threshold) out.push_back(k);
  return out;
}

}  // namespace mpshrink::kernels::serial
