#include "mpshrink/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "mpshrink/errors.hpp"

namespace mpshrink {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view next_token(std::string_view& rest) {
  std::size_t b = 0;
  while (b < rest.size() && is_space(rest[b])) ++b;
  std::size_t e = b;
  while (e < rest.size() && !is_space(rest[e])) ++e;
  auto tok = rest.substr(b, e - b);
  rest.remove_prefix(e);
  return tok;
}

// from_chars rejects a leading '+', the text format allows it.
bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_index(std::string_view s, std::uint32_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::vector<RawExample> parse_dataset(std::istream& in) {
  std::vector<RawExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest(line);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

    auto label_tok = next_token(rest);
    if (label_tok.empty()) continue;

    double label = 0.0;
    if (!parse_double(label_tok, label))
      throw ParseError(lineno, "bad label '" + std::string(label_tok) + "'");
    if (label != 1.0 && label != -1.0)
      throw ParseError(lineno, "label must be +1 or -1, got '" + std::string(label_tok) + "'");

    RawExample ex;
    ex.label = label > 0 ? 1 : -1;
    for (auto tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
      auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(lineno, "expected index:value, got '" + std::string(tok) + "'");
      Feature f{};
      if (!parse_index(tok.substr(0, colon), f.index) || f.index == 0)
        throw ParseError(lineno, "bad index in '" + std::string(tok) + "'");
      if (!parse_double(tok.substr(colon + 1), f.value))
        throw ParseError(lineno, "bad value in '" + std::string(tok) + "'");
      if (!ex.features.empty() && f.index <= ex.features.back().index)
        throw ParseError(lineno, "indices must be strictly ascending (index " +
                                     std::to_string(f.index) + ")");
      ex.features.push_back(f);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<RawExample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

std::string format_example(const RawExample& ex) {
  std::string s = ex.label > 0 ? "+1" : "-1";
  char buf[64];
  for (const auto& f : ex.features) {
    std::snprintf(buf, sizeof buf, " %u:%.17g", f.index, f.value);
    s += buf;
  }
  return s;
}

Dataset build_dataset(std::span<const RawExample> examples, double rho, double delta,
                      std::size_t feature_dim) {
  if (examples.empty()) throw InvalidParams("dataset is empty");
  if (!(rho > 0.0)) throw InvalidParams("rho must be > 0");
  if (!(delta >= 0.0)) throw InvalidParams("delta must be >= 0");

  std::size_t d = 0;
  for (const auto& ex : examples)
    if (!ex.features.empty()) d = std::max<std::size_t>(d, ex.features.back().index);
  if (feature_dim != 0) {
    if (feature_dim < d)
      throw DimensionMismatch("dataset uses feature index " + std::to_string(d) +
                              " beyond the expected " + std::to_string(feature_dim));
    d = feature_dim;
  }

  const bool extended = delta > 0.0;
  const std::size_t m = examples.size();

  Dataset ds;
  ds.features = d;
  ds.dim = d + 1 + (extended ? m : 0);
  ds.rho = rho;
  ds.delta = delta;
  ds.patterns.reserve(m);

  double max_sq = 0.0;
  double min_sq = INFINITY;
  for (std::size_t k = 0; k < m; ++k) {
    const auto& ex = examples[k];
    const double l = ex.label;
    Pattern p;
    p.label = ex.label;
    p.source_row = k;
    p.features.reserve(ex.features.size() + 2);
    double sq = 0.0;
    for (const auto& f : ex.features) {
      p.features.push_back({f.index - 1, l * f.value});
      sq += f.value * f.value;
    }
    p.features.push_back({static_cast<std::uint32_t>(d), l * rho});
    sq += rho * rho;
    if (extended) {
      p.features.push_back({static_cast<std::uint32_t>(d + 1 + k), l * delta});
      sq += delta * delta;
    }
    p.sq_norm = sq;
    max_sq = std::max(max_sq, sq);
    min_sq = std::min(min_sq, sq);
    ds.patterns.push_back(std::move(p));
  }
  ds.radius = std::sqrt(max_sq);
  ds.min_sq_norm = min_sq;
  return ds;
}

double sparse_dot(std::span<const double> w, const Pattern& p) {
  if (!p.features.empty() && p.features.back().index >= w.size())
    throw DimensionMismatch("pattern index " + std::to_string(p.features.back().index) +
                            " out of range for weight of length " + std::to_string(w.size()));
  double s = 0.0;
  for (const auto& f : p.features) s += w[f.index] * f.value;
  return s;
}

void write_summary(std::ostream& os, const Dataset& ds) {
  char buf[64];
  auto kv = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << k << '=' << buf << '\n';
  };
  os << "m=" << ds.size() << '\n' << "d=" << ds.features << '\n' << "dim=" << ds.dim << '\n';
  kv("R", ds.radius);
  kv("rho", ds.rho);
  kv("delta", ds.delta);
}

}  // namespace mpshrink
