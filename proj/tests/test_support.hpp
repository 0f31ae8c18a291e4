#pragma once

// Random problem generators shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mpshrink/data.hpp"

namespace mpshrink::gen {

using Rng = std::mt19937_64;

inline std::vector<double> random_unit(Rng& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> u(n);
  double s = 0.0;
  for (auto& v : u) {
    v = g(rng);
    s += v * v;
  }
  s = std::sqrt(s);
  for (auto& v : u) v /= s;
  return u;
}

/// Points uniform in [-1,1]^d labelled by a random hyperplane with bias;
/// points closer than `gap` (in the augmented direction) are resampled, so
/// the augmented set is separable with directional margin >= gap.
/// `density` < 1 zeroes coordinates at random (sparse rows).
inline std::vector<RawExample> separable(Rng& rng, std::size_t m, std::uint32_t d, double gap,
                                         double density = 1.0) {
  const auto u = random_unit(rng, d + 1);
  std::uniform_real_distribution<double> x(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<RawExample> out;
  out.reserve(m);
  while (out.size() < m) {
    RawExample ex;
    double s = u[d];
    for (std::uint32_t j = 1; j <= d; ++j) {
      if (density < 1.0 && !keep(rng)) continue;
      const double v = x(rng);
      ex.features.push_back({j, v});
      s += u[j - 1] * v;
    }
    if (std::abs(s) < gap) continue;
    ex.label = s > 0 ? 1 : -1;
    out.push_back(std::move(ex));
  }
  return out;
}

/// Same geometry but with a fraction of labels flipped (inseparable in the
/// augmented space unless extended).
inline std::vector<RawExample> noisy(Rng& rng, std::size_t m, std::uint32_t d, double flip) {
  auto out = separable(rng, m, d, 0.0);
  std::bernoulli_distribution coin(flip);
  for (auto& ex : out)
    if (coin(rng)) ex.label = -ex.label;
  return out;
}

inline std::vector<double> dense(const Pattern& p, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  for (const auto& f : p.features) v[f.index] = f.value;
  return v;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Largest |a_i/|a| - b_i/|b||.
inline double direction_gap(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = norm(a), nb = norm(b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] / na - b[i] / nb));
  return worst;
}

}  // namespace mpshrink::gen
