#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpshrink {

/// Parse failure in the sparse text format. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct Feature {
  std::uint32_t index;  // 1-based in RawExample, 0-based in Pattern
  double value;

  friend bool operator==(const Feature&, const Feature&) = default;
};

/// One labelled instance as read from the input: `label index:value ...`.
struct RawExample {
  int label = 1;
  std::vector<Feature> features;

  friend bool operator==(const RawExample&, const RawExample&) = default;
};

/// An augmented, reflected (and optionally extended) training vector
/// y_k = l_k [x_k, rho, Delta e_k], stored sparsely with 0-based indices.
struct Pattern {
  std::vector<Feature> features;
  double sq_norm = 0.0;
  std::size_t source_row = 0;
  int label = 1;
};

struct Dataset {
  std::vector<Pattern> patterns;
  std::size_t features = 0;  // d, number of raw feature coordinates
  std::size_t dim = 0;       // d + 1 (+ m when extended)
  double radius = 0.0;       // R = max_k ||y_k||
  double min_sq_norm = 0.0;  // min_k ||y_k||^2
  double rho = 1.0;
  double delta = 0.0;

  std::size_t size() const noexcept { return patterns.size(); }
  std::size_t bias_index() const noexcept { return features; }
};

std::vector<RawExample> parse_dataset(std::istream& in);
std::vector<RawExample> load_dataset(const std::string& path);

/// Writes one example in the same grammar `parse_dataset` accepts.
std::string format_example(const RawExample& ex);

/// Builds the training space. `feature_dim` forces d (must cover every
/// index seen); zero means "max index seen".
Dataset build_dataset(std::span<const RawExample> examples, double rho, double delta,
                      std::size_t feature_dim = 0);

/// Sequential-order sum of w[i] * v over the pattern's entries.
double sparse_dot(std::span<const double> w, const Pattern& p);

/// w += coef * y
inline void axpy(double coef, const Pattern& p, std::span<double> w) {
  for (const auto& f : p.features) w[f.index] += coef * f.value;
}

void write_summary(std::ostream& os, const Dataset& ds);

}  // namespace mpshrink
