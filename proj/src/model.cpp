#include "mpshrink/model.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "mpshrink/errors.hpp"

namespace mpshrink {

std::string to_string(Algo a) {
  switch (a) {
    case Algo::mpcs: return "mpcs";
    case Algo::mpvs: return "mpvs";
    case Algo::perceptron: return "perceptron";
  }
  return "?";
}

Algo algo_from_string(const std::string& s) {
  if (s == "mpcs") return Algo::mpcs;
  if (s == "mpvs") return Algo::mpvs;
  if (s == "perceptron") return Algo::perceptron;
  throw InvalidParams("unknown algorithm '" + s + "'");
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void validate(const Hyperparams& hp, const Dataset& ds, Algo algo) {
  if (!(hp.eta > 0.0) || !std::isfinite(hp.eta)) throw InvalidParams("eta must be > 0");
  if (!(hp.b > 0.0) || !std::isfinite(hp.b)) throw InvalidParams("b must be > 0");
  if (hp.lup < 1) throw InvalidParams("lup must be >= 1");
  if (!(hp.cbar >= 1.0)) throw InvalidParams("cbar must be >= 1");
  if (hp.nep1 < 1 || hp.nep2 < 1) throw InvalidParams("nep1 and nep2 must be >= 1");
  if (ds.size() == 0) throw InvalidParams("dataset is empty");

  switch (algo) {
    case Algo::perceptron: break;
    case Algo::mpcs:
      if (!(hp.lambda >= 0.0) || !std::isfinite(hp.lambda))
        throw InvalidParams("lambda must be >= 0");
      if (!(hp.eta * hp.lambda < 1.0))
        throw InvalidParams("eta*lambda = " + format_real(hp.eta * hp.lambda) + " must be < 1");
      if (!(hp.lambda * hp.b < ds.min_sq_norm))
        throw InvalidParams("lambda*b = " + format_real(hp.lambda * hp.b) +
                            " must be < min ||y||^2 = " + format_real(ds.min_sq_norm));
      break;
    case Algo::mpvs:
      if (hp.n < 0) throw InvalidParams("n must be >= 0");
      break;
  }
}

std::vector<double> TrainState::weights() const {
  std::vector<double> out(w);
  if (scale != 1.0)
    for (auto& v : out) v *= scale;
  return out;
}

double TrainState::sq_norm() const {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s * scale * scale;
}

double TrainState::norm() const {
  double s = 0.0;
  for (double v : w) s += v * v;
  return std::sqrt(s) * std::abs(scale);
}

void TrainState::fold_scale() {
  if (scale == 1.0) return;
  for (auto& v : w) v *= scale;
  scale = 1.0;
}

MarginEval evaluate_margin(std::span<const double> w, const Dataset& ds) {
  if (w.size() != ds.dim)
    throw DimensionMismatch("weight has " + std::to_string(w.size()) +
                            " coordinates, dataset has dim " + std::to_string(ds.dim));
  double sq = 0.0;
  for (double v : w) sq += v * v;
  if (!(sq > 0.0)) throw InvalidParams("margin of the zero weight vector is undefined");
  const auto best = kernels::min_dot(w, 1.0, ds.patterns);
  return {best.value / std::sqrt(sq), best.index};
}

DerivedParams derived_params(Algo algo, const Hyperparams& hp, double radius,
                             std::optional<double> gamma_hat) {
  DerivedParams out{};
  out.delta_p = hp.eta * radius * radius / hp.b;
  switch (algo) {
    case Algo::mpvs: out.epsilon_p = 1.0 / (hp.n + 1.0); break;
    case Algo::perceptron: out.epsilon_p = 1.0; break;
    case Algo::mpcs:
      if (hp.lambda == 0.0) {
        out.epsilon_p = 1.0;
        break;
      }
      if (!gamma_hat || !(*gamma_hat > 0.0))
        throw InvalidParams("epsilon for mpcs needs an estimate of gamma_d");
      out.epsilon_p = 1.0 - hp.lambda * hp.b / (*gamma_hat * *gamma_hat);
      break;
  }
  return out;
}

void write_model(std::ostream& os, const Model& model) {
  os << "algo=" << to_string(model.algo) << '\n';
  os << "eta=" << format_real(model.hp.eta) << '\n';
  os << "b=" << format_real(model.hp.b) << '\n';
  if (model.algo == Algo::mpvs)
    os << "n=" << model.hp.n << '\n';
  else
    os << "lambda=" << format_real(model.algo == Algo::perceptron ? 0.0 : model.hp.lambda) << '\n';
  os << "t=" << model.t << '\n';
  os << "rho=" << format_real(model.hp.rho) << '\n';
  os << "delta=" << format_real(model.hp.delta) << '\n';
  os << "dim=" << model.dim << '\n';
  os << "features=" << model.features << '\n';
  for (const auto& [k, v] : model.extra) os << k << '=' << v << '\n';
  for (std::size_t i = 0; i < model.w.size(); ++i)
    if (model.w[i] != 0.0) os << "w " << i + 1 << ' ' << format_real(model.w[i]) << '\n';
}

namespace {

double to_real(const std::string& s, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ParseError(line, "bad number '" + s + "'");
  return v;
}

std::uint64_t to_count(const std::string& s, std::size_t line) {
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ParseError(line, "bad integer '" + s + "'");
  return v;
}

}  // namespace

Model read_model(std::istream& is) {
  Model model;
  bool have_algo = false;
  bool have_dim = false;
  std::vector<std::pair<std::size_t, double>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("w ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      std::string idx, val, junk;
      if (!(ls >> idx >> val) || (ls >> junk)) throw ParseError(lineno, "bad weight line");
      const auto i = to_count(idx, lineno);
      if (i == 0) throw ParseError(lineno, "weight indices are 1-based");
      entries.emplace_back(i - 1, to_real(val, lineno));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    const auto key = line.substr(0, eq);
    const auto val = line.substr(eq + 1);
    if (key == "algo") {
      try {
        model.algo = algo_from_string(val);
      } catch (const InvalidParams& e) {
        throw ParseError(lineno, e.what());
      }
      have_algo = true;
    } else if (key == "eta") {
      model.hp.eta = to_real(val, lineno);
    } else if (key == "b") {
      model.hp.b = to_real(val, lineno);
    } else if (key == "lambda") {
      model.hp.lambda = to_real(val, lineno);
    } else if (key == "n") {
      model.hp.n = static_cast<int>(to_count(val, lineno));
    } else if (key == "t") {
      model.t = to_count(val, lineno);
    } else if (key == "rho") {
      model.hp.rho = to_real(val, lineno);
    } else if (key == "delta") {
      model.hp.delta = to_real(val, lineno);
    } else if (key == "dim") {
      model.dim = to_count(val, lineno);
      have_dim = true;
    } else if (key == "features") {
      model.features = to_count(val, lineno);
    } else {
      model.extra.emplace_back(key, val);
    }
  }
  if (!have_algo || !have_dim) throw ParseError(lineno, "model file lacks algo= or dim=");
  model.w.assign(model.dim, 0.0);
  for (auto [i, v] : entries) {
    if (i >= model.dim) throw ParseError(lineno, "weight index beyond dim");
    model.w[i] = v;
  }
  return model;
}

}  // namespace mpshrink
