#include "mpshrink/certify.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>

#include "mpshrink/errors.hpp"

namespace mpshrink::certify {

namespace mp = boost::multiprecision;

McpsBounds mpcs_bounds(double radius, double gamma_d, double eta, double b, double lambda) {
  if (!(gamma_d > 0.0)) throw InvalidParams("gamma_d must be > 0");
  const double r2g2 = radius * radius / (gamma_d * gamma_d);
  const double delta = eta * radius * radius / b;

  if (lambda == 0.0) {
    return {(1.0 + 2.0 / delta) * r2g2, 1.0 / (2.0 + delta), delta, 1.0};
  }

  const double eps = 1.0 - lambda * b / (gamma_d * gamma_d);
  if (!(delta <= 2.0)) throw InvalidParams("delta = " + format_real(delta) + " > 2");
  if (!(eps < 1.0)) throw InvalidParams("epsilon = " + format_real(eps) + " is not < 1");
  if (!(delta / (2.0 + delta) < eps))
    throw InvalidParams("epsilon = " + format_real(eps) + " is not > delta/(2+delta) = " +
                        format_real(delta / (2.0 + delta)));

  const double num = 4.0 - (2.0 + delta) * eps + delta;
  const double den = (2.0 + delta) * eps - delta;
  const double t_upper = r2g2 / (delta * (1.0 - eps)) * std::log(num / den);
  const double f_before = 1.0 / (2.0 + delta) + (1.0 - eps) / 2.0;
  return {t_upper, f_before, delta, eps};
}

double cal_a(double radius, double gamma_d, double eta, double b, double lambda) {
  const double el = eta * lambda;
  return lambda * (b / (gamma_d * gamma_d)) * (eta * radius * radius / b + 2.0 * (1.0 - el)) /
         (2.0 - el);
}

MpvsBounds mpvs_bounds(double radius, double gamma_d, double eta, double b, int n) {
  if (n < 0) throw InvalidParams("n must be >= 0");
  if (!(gamma_d > 0.0)) throw InvalidParams("gamma_d must be > 0");
  const double r2g2 = radius * radius / (gamma_d * gamma_d);
  const double n1 = n + 1.0;
  const double n2 = 2.0 * n + 1.0;
  const double delta = eta * radius * radius / b;
  const double eps = 1.0 / n1;

  MpvsBounds out{};
  out.t_upper = (n1 * n1 / n2) * (1.0 + 2.0 * b / (eta * radius * radius)) * r2g2;
  out.t_lower = (1.0 / (eps * delta)) * ((1.0 - eps / 2.0) / (1.0 + delta / 2.0)) * r2g2;
  out.f_before = (n2 / (2.0 * n1)) / (1.0 + eta * radius * radius / (2.0 * b));
  return out;
}

AfterRun mpcs_after_run(std::uint64_t t_c, double norm_shrunk, double gamma_prime, double eta,
                        double lambda) {
  if (t_c == 0) throw InvalidParams("after-run bound needs at least one update");
  if (!(norm_shrunk > 0.0)) throw InvalidParams("zero weight vector");
  double f;
  if (lambda == 0.0) {
    f = eta * static_cast<double>(t_c) * gamma_prime / norm_shrunk;
  } else {
    // (1 - q^t)/(lambda q^{t-1}) * gamma'/||a_t|| with ||a_t|| = ||a^s||/q^{t-1}.
    const double one_minus_qt = -std::expm1(static_cast<double>(t_c) * std::log1p(-eta * lambda));
    f = one_minus_qt * gamma_prime / (lambda * norm_shrunk);
  }
  return {f, gamma_prime / f};
}

AfterRun mpvs_after_run(double powersum, double norm_a, double gamma_prime, double eta) {
  if (!(norm_a > 0.0)) throw InvalidParams("zero weight vector");
  const double f = eta * powersum * gamma_prime / norm_a;
  return {f, gamma_prime / f};
}

McpsAccuracy accuracy_params_mpcs(double zeta, double radius, double b, double gamma_hat) {
  if (!(zeta > 0.0) || !(zeta < 1.0 / std::sqrt(2.0)))
    throw InvalidParams("zeta must lie in (0, 1/sqrt(2))");
  if (!(gamma_hat > 0.0)) throw InvalidParams("zeta parameterization needs gamma_hat > 0");
  const double delta = 2.0 * zeta;
  const double eps = delta * (1.0 + delta) / (2.0 + delta);
  return {delta * b / (radius * radius), (1.0 - eps) * gamma_hat * gamma_hat / b, delta, eps};
}

MpvsAccuracy accuracy_params_mpvs(double epsilon, double radius, double b) {
  if (!(epsilon > 0.0) || !(epsilon <= 1.0)) throw InvalidParams("epsilon must lie in (0, 1]");
  // 1/epsilon may land a few ulps above an integer (1/0.1); don't round that up.
  const double inv = 1.0 / epsilon;
  const int n = static_cast<int>(std::ceil(inv - 1e-9 * inv)) - 1;
  return {epsilon * b / (radius * radius), n};
}

Certificate certify_run(const Dataset& ds, const Hyperparams& hp, Algo algo, const RunResult& run,
                        std::optional<double> gamma_d) {
  Certificate c;
  const auto w = run.state.weights();
  const double norm = run.state.norm();
  const auto margin = evaluate_margin(w, ds);
  c.gamma_prime = margin.gamma_prime;
  const double lambda = algo == Algo::perceptron ? 0.0 : hp.lambda;

  AfterRun ar{};
  if (algo == Algo::mpvs)
    ar = mpvs_after_run(run.state.powersum, norm, c.gamma_prime, hp.eta);
  else
    ar = mpcs_after_run(run.t_c, norm, c.gamma_prime, hp.eta, lambda);
  c.f_after = ar.f_after;
  c.gamma_d_upper = ar.gamma_d_upper;
  if (gamma_d) c.f_vs_oracle = c.gamma_prime / *gamma_d;

  // Update bounds grow as gamma shrinks, so the upper bound takes the
  // smallest admissible gamma; margin-fraction and lower bounds the largest.
  const double g_lo = gamma_d ? *gamma_d : c.gamma_prime;
  const double g_hi = gamma_d ? *gamma_d : c.gamma_d_upper;
  const double r = ds.radius;

  c.delta_p = hp.eta * r * r / hp.b;
  if (algo == Algo::mpvs) {
    c.epsilon_p = 1.0 / (hp.n + 1.0);
    if (g_lo > 0.0) c.t_bound_upper = mpvs_bounds(r, g_lo, hp.eta, hp.b, hp.n).t_upper;
    if (g_hi > 0.0) {
      const auto hi = mpvs_bounds(r, g_hi, hp.eta, hp.b, hp.n);
      c.t_bound_lower = hi.t_lower;
      c.f_before = hi.f_before;
    }
  } else {
    c.epsilon_p = g_hi > 0.0 ? 1.0 - lambda * hp.b / (g_hi * g_hi) : 1.0;
    if (g_lo > 0.0) {
      try {
        c.t_bound_upper = mpcs_bounds(r, g_lo, hp.eta, hp.b, lambda).t_upper;
      } catch (const InvalidParams&) {
      }
    }
    if (g_hi > 0.0) {
      try {
        c.f_before = mpcs_bounds(r, g_hi, hp.eta, hp.b, lambda).f_before;
      } catch (const InvalidParams&) {
      }
    }
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> certificate_fields(const Certificate& c) {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("na"); };
  return {
      {"gamma_prime", format_real(c.gamma_prime)},
      {"f_after", format_real(c.f_after)},
      {"gamma_d_upper", format_real(c.gamma_d_upper)},
      {"f_before", opt(c.f_before)},
      {"t_bound_upper", opt(c.t_bound_upper)},
      {"t_bound_lower", opt(c.t_bound_lower)},
      {"f_vs_oracle", opt(c.f_vs_oracle)},
      {"delta_p", format_real(c.delta_p)},
      {"epsilon_p", format_real(c.epsilon_p)},
  };
}

LemmaCheck lemma_check(int n, std::uint64_t t) {
  if (n < 0 || t < 1) throw InvalidParams("lemma_check needs n >= 0 and t >= 1");
  const auto un = static_cast<unsigned>(n);
  mp::cpp_int s_n = 0, s_2n = 0;
  for (std::uint64_t k = 1; k <= t; ++k) {
    const mp::cpp_int kn = mp::pow(mp::cpp_int(k), un);
    s_n += kn;
    s_2n += kn * kn;
  }
  const mp::cpp_int n1 = n + 1, n2 = 2 * n + 1, bt = t, t1 = t + 1;
  const mp::cpp_int t1n = mp::pow(t1, un);

  LemmaCheck out{};
  {
    const mp::cpp_int lhs = n1 * s_n, rhs = bt * t1n;
    out.lemma1 = {lhs.convert_to<double>(), rhs.convert_to<double>(), lhs <= rhs};
  }
  {
    // Scaled by (2n+1) to stay in integers.
    const mp::cpp_int lhs = n2 * n1 * s_n;
    const mp::cpp_int rhs = n2 * t1n * t1 - n1 * n1 * t1n;
    out.lemma2 = {(n1 * s_n).convert_to<double>(),
                  rhs.convert_to<double>() / n2.convert_to<double>(), lhs >= rhs};
  }
  {
    const mp::cpp_int lhs = n2 * bt * s_2n, rhs = n1 * n1 * s_n * s_n;
    out.lemma3 = {lhs.convert_to<double>(), rhs.convert_to<double>(), lhs <= rhs};
  }
  return out;
}

std::uint64_t lemma_sweep(int n, std::uint64_t t_max) {
  if (n < 0) throw InvalidParams("lemma_sweep needs n >= 0");
  const auto un = static_cast<unsigned>(n);
  const mp::cpp_int n1 = n + 1, n2 = 2 * n + 1;
  mp::cpp_int s_n = 0, s_2n = 0;
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    const mp::cpp_int bt = t;
    const mp::cpp_int tn = mp::pow(bt, un);
    s_n += tn;
    s_2n += tn * tn;
    const mp::cpp_int t1 = t + 1;
    const mp::cpp_int t1n = mp::pow(t1, un);
    const bool l1 = n1 * s_n <= bt * t1n;
    const bool l2 = n2 * n1 * s_n >= n2 * t1n * t1 - n1 * n1 * t1n;
    const bool l3 = n2 * bt * s_2n <= n1 * n1 * s_n * s_n;
    if (!(l1 && l2 && l3)) return t;
  }
  return 0;
}

namespace {

struct Outcome {
  RunResult run;
  Certificate cert;
};

Outcome run_stage(const Dataset& ds, const Hyperparams& hp, Algo algo, const TrainOptions& opts,
                  int stage) {
  auto run = train(ds, hp, algo, opts);
  if (!run.converged)
    throw BudgetExhausted("stage " + std::to_string(stage) + " did not converge within " +
                          std::to_string(hp.max_updates) + " updates");
  auto cert = certify_run(ds, hp, algo, run);
  return {std::move(run), cert};
}

}  // namespace

StagedResult staged_lambda(const Dataset& ds, const Hyperparams& hp_base, double target_f,
                           int max_stages, const TrainOptions& opts) {
  if (!(target_f < 1.0)) throw InvalidParams("target_f must be < 1");
  if (max_stages < 1) throw InvalidParams("max_stages must be >= 1");

  StagedResult out;
  Hyperparams hp = hp_base;
  hp.lambda = 0.0;
  double gamma_bar = 0.0;
  double prev_f = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  auto stage_lambda = [&] {
    const double delta = hp.eta * ds.radius * ds.radius / hp.b;
    return (2.0 / (2.0 + delta)) * gamma_bar * gamma_bar / hp.b;
  };
  for (int s = 0; s < max_stages; ++s) {
    if (s > 0) {
      const double prev_lambda = hp.lambda, prev_eta = hp.eta;
      hp.lambda = stage_lambda();
      // No better margin and no eta change would rerun the previous stage
      // exactly and register as stagnation; halve eta straight away.
      if (hp.lambda == prev_lambda && hp.eta == prev_eta) {
        hp.eta *= 0.5;
        hp.lambda = stage_lambda();
      }
    }
    auto o = run_stage(ds, hp, Algo::mpcs, opts, s);
    out.stages.push_back({s, hp.lambda, hp.eta, o.run.t_c, o.cert.gamma_prime, o.cert.f_after,
                          o.cert.gamma_d_upper, gamma_bar});

    const double f = o.cert.f_after;
    if (!have_best || f > out.cert.f_after) {
      out.run = std::move(o.run);
      out.cert = o.cert;
      out.hp = hp;
      have_best = true;
    }
    if (f >= target_f) {
      out.reached = true;
      break;
    }
    if (s > 0 && f - prev_f < 1e-4) hp.eta *= 0.5;
    prev_f = f;
    gamma_bar = std::max(gamma_bar, o.cert.gamma_prime);
  }
  return out;
}

StagedResult decreasing_eta(const Dataset& ds, const Hyperparams& hp_base, Algo algo,
                            double target_f, int max_stages, const TrainOptions& opts) {
  if (!(target_f < 1.0)) throw InvalidParams("target_f must be < 1");
  if (max_stages < 1) throw InvalidParams("max_stages must be >= 1");

  StagedResult out;
  Hyperparams hp = hp_base;
  bool have_best = false;
  for (int s = 0; s < max_stages; ++s) {
    auto o = run_stage(ds, hp, algo, opts, s);
    out.stages.push_back({s, algo == Algo::mpcs ? hp.lambda : 0.0, hp.eta, o.run.t_c,
                          o.cert.gamma_prime, o.cert.f_after, o.cert.gamma_d_upper, 0.0});
    const double f = o.cert.f_after;
    if (!have_best || f > out.cert.f_after) {
      out.run = std::move(o.run);
      out.cert = o.cert;
      out.hp = hp;
      have_best = true;
    }
    if (f >= target_f) {
      out.reached = true;
      break;
    }
    hp.eta *= 0.5;
  }
  return out;
}

}  // namespace mpshrink::certify
