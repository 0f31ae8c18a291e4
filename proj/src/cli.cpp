#include "mpshrink/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "mpshrink/certify.hpp"
#include "mpshrink/data.hpp"
#include "mpshrink/errors.hpp"
#include "mpshrink/kernels.hpp"
#include "mpshrink/model.hpp"
#include "mpshrink/oracle.hpp"
#include "mpshrink/scheduler.hpp"

namespace mpshrink::cli {

namespace {

using Fields = std::vector<std::pair<std::string, std::string>>;

struct TrainArgs {
  std::string data;
  std::string algo = "mpvs";
  double eta = 0.1;
  std::string b = "auto";
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<double> gamma_hat;
  int n = 3;
  std::optional<double> zeta;
  double delta_ext = 0.0;
  double rho = 1.0;
  std::uint64_t lup = 1000;
  double cbar = 1.01;
  int nep1 = 5;
  int nep2 = 5;
  bool no_active_set = false;
  std::string order = "seq";
  std::uint64_t seed = 0;
  std::uint64_t max_updates = 1'000'000'000;
  double target_f = 0.99;
  int max_stages = 10;
  std::string model_out;
  std::string report = "text";
  bool strict_bounds = false;
  bool with_oracle = false;
  bool eta_given = false;
};

void add_train_options(CLI::App& cmd, TrainArgs& a, bool autotune) {
  cmd.add_option("data", a.data, "Dataset in `label index:value ...` format")->required();
  cmd.add_option("--algo", a.algo, "mpcs | mpvs | perceptron")
      ->check(CLI::IsMember({"mpcs", "mpvs", "perceptron"}));
  cmd.add_option("--eta", a.eta, "Learning rate");
  cmd.add_option("--b", a.b, "Margin threshold, or `auto` for R^2");
  cmd.add_option("--lambda", a.lambda, "Constant shrinking parameter (mpcs)");
  cmd.add_option("--epsilon", a.epsilon,
                 "Accuracy epsilon: mpcs lambda=(1-eps)gamma_hat^2/b; mpvs n=ceil(1/eps)-1");
  cmd.add_option("--gamma-hat", a.gamma_hat, "Estimate of the maximum directional margin");
  cmd.add_option("--n", a.n, "Shrinking exponent (mpvs)");
  cmd.add_option("--zeta", a.zeta, "Single accuracy parameter for mpcs (sets eta and lambda)");
  cmd.add_option("--delta-ext", a.delta_ext, "Per-instance extension Delta (0 = off)");
  cmd.add_option("--rho", a.rho, "Augmentation coordinate");
  cmd.add_option("--lup", a.lup, "Multiplicity cap");
  cmd.add_option("--cbar", a.cbar, "Active-set selection slack");
  cmd.add_option("--nep1", a.nep1, "Level-1 active-set epochs");
  cmd.add_option("--nep2", a.nep2, "Level-2 active-set epochs");
  cmd.add_flag("--no-active-set", a.no_active_set, "Plain full passes only");
  cmd.add_option("--order", a.order, "seq | shuffle")->check(CLI::IsMember({"seq", "shuffle"}));
  cmd.add_option("--seed", a.seed, "Shuffle seed");
  cmd.add_option("--max-updates", a.max_updates, "Update budget");
  cmd.add_option("--model-out", a.model_out, "Write the model here");
  cmd.add_option("--report", a.report, "text | csv")->check(CLI::IsMember({"text", "csv"}));
  cmd.add_flag("--strict-bounds", a.strict_bounds, "Reject delta = eta R^2/b > 2");
  cmd.add_flag("--oracle", a.with_oracle, "Also compute the exact gamma_d (small data)");
  if (autotune) {
    cmd.add_option("--target-f", a.target_f, "Certified margin fraction to reach");
    cmd.add_option("--max-stages", a.max_stages, "Stage limit");
  }
}

struct Resolved {
  Algo algo;
  Hyperparams hp;
  Dataset ds;
};

Resolved resolve(const TrainArgs& a, bool autotune) {
  Resolved r;
  r.algo = algo_from_string(a.algo);
  const auto examples = load_dataset(a.data);
  r.ds = build_dataset(examples, a.rho, a.delta_ext);

  Hyperparams& hp = r.hp;
  hp.eta = a.eta;
  hp.n = a.n;
  hp.lup = a.lup;
  hp.cbar = a.cbar;
  hp.nep1 = a.nep1;
  hp.nep2 = a.nep2;
  hp.max_updates = a.max_updates;
  hp.rho = a.rho;
  hp.delta = a.delta_ext;
  const double r2 = r.ds.radius * r.ds.radius;
  if (a.b == "auto") {
    hp.b = r2;
  } else {
    try {
      std::size_t pos = 0;
      hp.b = std::stod(a.b, &pos);
      if (pos != a.b.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidParams("--b must be a real number or `auto`");
    }
  }

  if (r.algo == Algo::mpvs) {
    if (a.epsilon) {
      const auto acc = certify::accuracy_params_mpvs(*a.epsilon, r.ds.radius, hp.b);
      hp.n = acc.n;
      if (!a.eta_given) hp.eta = acc.eta;
    }
  } else if (r.algo == Algo::mpcs && !autotune) {
    if (a.zeta) {
      if (!a.gamma_hat) throw InvalidParams("--zeta needs --gamma-hat");
      const auto acc = certify::accuracy_params_mpcs(*a.zeta, r.ds.radius, hp.b, *a.gamma_hat);
      hp.eta = acc.eta;
      hp.lambda = acc.lambda;
    } else if (a.lambda) {
      hp.lambda = *a.lambda;
    } else if (a.epsilon) {
      if (!a.gamma_hat) throw InvalidParams("--epsilon for mpcs needs --gamma-hat");
      hp.lambda = (1.0 - *a.epsilon) * *a.gamma_hat * *a.gamma_hat / hp.b;
    } else {
      throw InvalidParams("mpcs needs --lambda, --epsilon or --zeta (or use autotune)");
    }
  }
  if (a.strict_bounds && hp.eta * r2 / hp.b > 2.0)
    throw InvalidParams("delta = eta R^2 / b = " + format_real(hp.eta * r2 / hp.b) + " > 2");
  validate(hp, r.ds, r.algo);
  return r;
}

TrainOptions train_options(const TrainArgs& a) {
  TrainOptions opts;
  opts.order = a.order == "shuffle" ? Order::shuffled : Order::sequential;
  opts.seed = a.seed;
  opts.use_active_sets = !a.no_active_set;
  return opts;
}

Fields run_fields(const Resolved& r, const RunResult& run) {
  Fields f = {
      {"algo", to_string(r.algo)},
      {"m", std::to_string(r.ds.size())},
      {"d", std::to_string(r.ds.features)},
      {"dim", std::to_string(r.ds.dim)},
      {"R", format_real(r.ds.radius)},
      {"rho", format_real(r.ds.rho)},
      {"delta", format_real(r.ds.delta)},
      {"b", format_real(r.hp.b)},
      {"eta", format_real(r.hp.eta)},
  };
  if (r.algo == Algo::mpvs)
    f.emplace_back("n", std::to_string(r.hp.n));
  else
    f.emplace_back("lambda", format_real(r.algo == Algo::perceptron ? 0.0 : r.hp.lambda));
  f.emplace_back("lup", std::to_string(r.hp.lup));
  f.emplace_back("converged", run.converged ? "1" : "0");
  f.emplace_back("t_c", std::to_string(run.t_c));
  f.emplace_back("full_passes", std::to_string(run.full_passes));
  f.emplace_back("presentations", std::to_string(run.presentations));
  f.emplace_back("wall_time_s", format_real(run.wall_time.count()));
  return f;
}

void print_fields(std::ostream& out, const Fields& f, const std::string& style) {
  if (style == "csv") {
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i].first;
    out << '\n';
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i].second;
    out << '\n';
  } else {
    for (const auto& [k, v] : f) out << k << '=' << v << '\n';
  }
}

void save_model(const std::string& path, const Resolved& r, const RunResult& run,
                const Fields& cert) {
  if (path.empty()) return;
  Model model;
  model.algo = r.algo;
  model.hp = r.hp;
  model.t = run.t_c;
  model.features = r.ds.features;
  model.dim = r.ds.dim;
  model.w = run.state.weights();
  for (const auto& [k, v] : cert) model.extra.emplace_back("cert." + k, v);
  std::ofstream os(path);
  if (!os) throw IoError("cannot write model '" + path + "'");
  write_model(os, model);
  if (!os) throw IoError("failed writing model '" + path + "'");
}

std::optional<double> maybe_oracle(const TrainArgs& a, const Dataset& ds) {
  if (!a.with_oracle) return std::nullopt;
  const auto g = oracle::exact_gamma_d(ds);
  if (!g.separable) return std::nullopt;
  return g.gamma_d;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  auto r = resolve(a, false);
  const auto gamma_d = maybe_oracle(a, r.ds);
  const auto run = train(r.ds, r.hp, r.algo, train_options(a));
  auto fields = run_fields(r, run);
  Fields cert;
  if (run.t_c > 0) {
    cert = certificate_fields(certify::certify_run(r.ds, r.hp, r.algo, run, gamma_d));
    fields.insert(fields.end(), cert.begin(), cert.end());
  }
  print_fields(out, fields, a.report);
  save_model(a.model_out, r, run, cert);
  return run.converged ? ok : budget;
}

int cmd_autotune(const TrainArgs& a, std::ostream& out) {
  auto r = resolve(a, true);
  const auto opts = train_options(a);
  certify::StagedResult res;
  if (r.algo == Algo::mpvs)
    res = certify::decreasing_eta(r.ds, r.hp, Algo::mpvs, a.target_f, a.max_stages, opts);
  else
    res = certify::staged_lambda(r.ds, r.hp, a.target_f, a.max_stages, opts);

  for (const auto& s : res.stages) {
    out << "stage=" << s.index << " lambda=" << format_real(s.lambda)
        << " eta=" << format_real(s.eta) << " t_c=" << s.t_c
        << " gamma_prime=" << format_real(s.gamma_prime) << " f_after=" << format_real(s.f_after)
        << " gamma_d_upper=" << format_real(s.gamma_d_upper) << '\n';
  }
  // staged_lambda always trains the mpcs form; the stage-0 run is the
  // perceptron with margin.
  if (r.algo != Algo::mpvs) r.algo = Algo::mpcs;
  r.hp = res.hp;
  auto fields = run_fields(r, res.run);
  fields.emplace_back("stages", std::to_string(res.stages.size()));
  fields.emplace_back("target_f", format_real(a.target_f));
  fields.emplace_back("reached", res.reached ? "1" : "0");
  const auto cert = certificate_fields(res.cert);
  fields.insert(fields.end(), cert.begin(), cert.end());
  print_fields(out, fields, a.report);
  save_model(a.model_out, r, res.run, cert);
  return res.reached ? ok : budget;
}

int cmd_eval(const std::string& model_path, const std::string& data, std::ostream& out) {
  std::ifstream is(model_path);
  if (!is) throw IoError("cannot open model '" + model_path + "'");
  const Model model = read_model(is);
  const auto examples = load_dataset(data);
  const auto ds = build_dataset(examples, model.hp.rho, model.hp.delta, model.features);
  if (ds.dim != model.dim)
    throw DimensionMismatch("model dim " + std::to_string(model.dim) + " != dataset dim " +
                            std::to_string(ds.dim));
  const auto margin = evaluate_margin(model.w, ds);
  std::size_t err_pos = 0, err_neg = 0, n_pos = 0, n_neg = 0;
  for (const auto& p : ds.patterns) {
    const bool wrong = sparse_dot(model.w, p) <= 0.0;
    (p.label > 0 ? n_pos : n_neg)++;
    if (wrong) (p.label > 0 ? err_pos : err_neg)++;
  }
  double sq = 0.0;
  for (double v : model.w) sq += v * v;
  out << "gamma_prime=" << format_real(margin.gamma_prime) << '\n'
      << "argmin_index=" << margin.argmin_index << '\n'
      << "norm_w=" << format_real(std::sqrt(sq)) << '\n'
      << "m=" << ds.size() << '\n'
      << "positives=" << n_pos << '\n'
      << "negatives=" << n_neg << '\n'
      << "errors_pos=" << err_pos << '\n'
      << "errors_neg=" << err_neg << '\n';
  return ok;
}

int cmd_oracle(const std::string& data, double rho, double delta, std::ostream& out) {
  const auto ds = build_dataset(load_dataset(data), rho, delta);
  const auto g = oracle::exact_gamma_d(ds);
  out << "separable=" << (g.separable ? 1 : 0) << '\n'
      << "gamma_d=" << format_real(g.gamma_d) << '\n'
      << "gamma_lower=" << format_real(g.gamma_lower) << '\n'
      << "gap=" << format_real(g.gap) << '\n'
      << "R=" << format_real(ds.radius) << '\n'
      << "support=" << g.support.size() << '\n'
      << "iterations=" << g.iterations << '\n';
  return ok;
}

int cmd_selftest(std::ostream& out) {
  int failures = 0;
  auto line = [&](const char* name, bool pass) {
    out << (pass ? "PASS " : "FAIL ") << name << '\n';
    if (!pass) ++failures;
  };

  bool lemmas = true;
  for (int n = 0; n <= 10; ++n) lemmas = lemmas && certify::lemma_sweep(n, 200) == 0;
  line("power-sum inequalities n<=10 t<=200", lemmas);

  std::istringstream toy("+1 1:1\n-1 1:-1\n");
  const auto ds = build_dataset(parse_dataset(toy), 1.0, 0.0);
  Hyperparams hp;
  hp.eta = 1.0;
  hp.b = 0.5;
  hp.n = 0;
  TrainOptions opts;
  opts.use_active_sets = false;
  const auto run = train(ds, hp, Algo::mpvs, opts);
  const auto w = run.state.weights();
  line("toy trace converges with t_c=2 and w=[2,0]",
       run.converged && run.t_c == 2 && w == std::vector<double>{2.0, 0.0});
  const auto g = oracle::exact_gamma_d(ds);
  line("toy oracle gamma_d=1", std::abs(g.gamma_d - 1.0) < 1e-12);
  const auto cert = certify::certify_run(ds, hp, Algo::mpvs, run, g.gamma_d);
  line("toy after-run bound f=1", std::abs(cert.f_after - 1.0) < 1e-12);
  return failures == 0 ? ok : failure;
}

template <class F>
int guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return io;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return io;
  } catch (const InvalidParams& e) {
    err << "error: " << e.what() << '\n';
    return config;
  } catch (const BudgetExhausted& e) {
    err << "error: " << e.what() << '\n';
    return budget;
  } catch (const oracle::OracleError& e) {
    err << "error: " << e.what() << '\n';
    return budget;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Margin perceptrons with weight shrinking"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  add_train_options(*train_cmd, train_args, false);

  TrainArgs tune_args;
  tune_args.algo = "mpcs";
  auto* tune_cmd = app.add_subcommand("autotune", "Staged training to a certified margin fraction");
  add_train_options(*tune_cmd, tune_args, true);

  std::string model_in, eval_data;
  auto* eval_cmd = app.add_subcommand("eval", "Margin report of a saved model on a dataset");
  eval_cmd->add_option("--model-in", model_in, "Model file")->required();
  eval_cmd->add_option("data", eval_data, "Dataset")->required();

  std::string oracle_data;
  double oracle_rho = 1.0, oracle_delta = 0.0;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact maximum directional margin (small data)");
  oracle_cmd->add_option("data", oracle_data, "Dataset")->required();
  oracle_cmd->add_option("--rho", oracle_rho, "Augmentation coordinate");
  oracle_cmd->add_option("--delta-ext", oracle_delta, "Per-instance extension Delta");

  auto* self_cmd = app.add_subcommand("selftest", "Quick internal consistency checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return config;
  }

  kernels::configure_threads_from_env();

  if (*train_cmd) {
    train_args.eta_given = train_cmd->count("--eta") > 0;
    return guarded([&] { return cmd_train(train_args, out); }, err);
  }
  if (*tune_cmd) {
    tune_args.eta_given = tune_cmd->count("--eta") > 0;
    return guarded([&] { return cmd_autotune(tune_args, out); }, err);
  }
  if (*eval_cmd) return guarded([&] { return cmd_eval(model_in, eval_data, out); }, err);
  if (*oracle_cmd)
    return guarded([&] { return cmd_oracle(oracle_data, oracle_rho, oracle_delta, out); }, err);
  if (*self_cmd) return guarded([&] { return cmd_selftest(out); }, err);
  return config;
}

}  // namespace mpshrink::cli
