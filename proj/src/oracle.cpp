#include "mpshrink/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mpshrink/errors.hpp"
#include "mpshrink/kernels.hpp"

namespace mpshrink::oracle {

namespace {

double sparse_sparse_dot(const Pattern& a, const Pattern& b) {
  double s = 0.0;
  auto i = a.features.begin();
  auto j = b.features.begin();
  while (i != a.features.end() && j != b.features.end()) {
    if (i->index < j->index) {
      ++i;
    } else if (j->index < i->index) {
      ++j;
    } else {
      s += i->value * j->value;
      ++i;
      ++j;
    }
  }
  return s;
}

double dense_sq(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Minimum-norm point of the affine hull of the support, as convex-combination
// weights summing to one: solve (G + 11^T) beta = 1, alpha = beta / sum(beta).
// Returns false when the support is affinely dependent.
bool affine_minimizer(const Eigen::MatrixXd& gram, Eigen::VectorXd& alpha) {
  const auto s = gram.rows();
  const Eigen::MatrixXd m = gram + Eigen::MatrixXd::Ones(s, s);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  if (ldlt.info() != Eigen::Success) return false;
  const auto& d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(d.minCoeff() > 1e-13 * dmax)) return false;
  const Eigen::VectorXd beta = ldlt.solve(Eigen::VectorXd::Ones(s));
  const double sum = beta.sum();
  if (!(std::abs(sum) > 0.0)) return false;
  alpha = beta / sum;
  return true;
}

class Wolfe {
 public:
  Wolfe(const Dataset& ds, const GammaOptions& opts) : ds_(ds), opts_(opts), x_(ds.dim, 0.0) {}

  GammaResult run() {
    const double r = ds_.radius;
    std::size_t start = 0;
    for (std::size_t k = 1; k < ds_.size(); ++k)
      if (ds_.patterns[k].sq_norm < ds_.patterns[start].sq_norm) start = k;
    add_to_support(start);
    lam_ = Eigen::VectorXd::Ones(1);
    rebuild_point();

    GammaResult out;
    for (std::size_t iter = 0;; ++iter) {
      out.iterations = iter;
      const double xx = dense_sq(x_);
      const double nx = std::sqrt(xx);
      if (nx <= 1e-12 * r) break;  // origin (numerically) inside the hull

      const auto best = kernels::min_dot(x_, 1.0, ds_.patterns);
      const double gap_sq = xx - best.value;
      if (gap_sq <= opts_.rel_tol * r * nx) break;
      if (iter >= opts_.max_iterations)
        throw OracleError("minimum-norm-point iteration cap reached, gap " +
                          format_real(gap_sq / nx));
      if (std::find(support_.begin(), support_.end(), best.index) != support_.end())
        throw OracleError("minimum-norm-point iteration stalled, gap " + format_real(gap_sq / nx));

      add_to_support(best.index);
      lam_.conservativeResize(lam_.size() + 1);
      lam_(lam_.size() - 1) = 0.0;
      minor_cycles();
      rebuild_point();
    }

    const double nx = std::sqrt(dense_sq(x_));
    out.support = support_;
    out.coefficients.assign(lam_.data(), lam_.data() + lam_.size());
    if (nx <= 1e-12 * r) {
      out.separable = false;
      out.gamma_d = 0.0;
      return out;
    }
    out.separable = true;
    out.gamma_d = nx;
    out.u.resize(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) out.u[i] = x_[i] / nx;
    out.gamma_lower = kernels::min_dot(out.u, 1.0, ds_.patterns).value;
    out.gap = out.gamma_d - out.gamma_lower;
    return out;
  }

 private:
  void add_to_support(std::size_t k) {
    const auto s = static_cast<Eigen::Index>(support_.size());
    gram_.conservativeResize(s + 1, s + 1);
    for (Eigen::Index i = 0; i < s; ++i) {
      const double g = sparse_sparse_dot(ds_.patterns[support_[i]], ds_.patterns[k]);
      gram_(i, s) = g;
      gram_(s, i) = g;
    }
    gram_(s, s) = ds_.patterns[k].sq_norm;
    support_.push_back(k);
  }

  void remove_from_support(Eigen::Index i) {
    const auto s = gram_.rows();
    for (Eigen::Index r = i; r + 1 < s; ++r) gram_.row(r) = gram_.row(r + 1);
    for (Eigen::Index c = i; c + 1 < s; ++c) gram_.col(c) = gram_.col(c + 1);
    gram_.conservativeResize(s - 1, s - 1);
    for (Eigen::Index r = i; r + 1 < lam_.size(); ++r) lam_(r) = lam_(r + 1);
    lam_.conservativeResize(lam_.size() - 1);
    support_.erase(support_.begin() + i);
  }

  void minor_cycles() {
    Eigen::VectorXd alpha;
    for (;;) {
      if (!affine_minimizer(gram_, alpha)) {
        // Affinely dependent support: drop the newest-but-one weakest point.
        Eigen::Index worst = 0;
        lam_.head(lam_.size() - 1).minCoeff(&worst);
        remove_from_support(worst);
        if (support_.size() == 1) {
          lam_(0) = 1.0;
          return;
        }
        continue;
      }
      if (alpha.minCoeff() > 0.0) {
        lam_ = alpha;
        return;
      }
      // Move from lam toward alpha until the first weight hits zero.
      double theta = 1.0;
      Eigen::Index hit = -1;
      for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha(i) <= 0.0) {
          const double th = lam_(i) / (lam_(i) - alpha(i));
          if (hit < 0 || th < theta) {
            theta = th;
            hit = i;
          }
        }
      }
      lam_ = theta * alpha + (1.0 - theta) * lam_;
      lam_(hit) = 0.0;
      for (Eigen::Index i = lam_.size() - 1; i >= 0; --i)
        if (lam_(i) <= 0.0) remove_from_support(i);
      lam_ /= lam_.sum();
      if (support_.size() == 1) return;
    }
  }

  void rebuild_point() {
    std::fill(x_.begin(), x_.end(), 0.0);
    for (std::size_t i = 0; i < support_.size(); ++i)
      axpy(lam_(static_cast<Eigen::Index>(i)), ds_.patterns[support_[i]], x_);
  }

  const Dataset& ds_;
  GammaOptions opts_;
  std::vector<double> x_;
  std::vector<std::size_t> support_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd lam_;
};

}  // namespace

GammaResult exact_gamma_d(const Dataset& ds, const GammaOptions& opts) {
  if (ds.size() == 0) throw InvalidParams("dataset is empty");
  return Wolfe(ds, opts).run();
}

GammaResult exhaustive_gamma_d(const Dataset& ds) {
  const std::size_t m = ds.size();
  if (m == 0 || m > 16) throw InvalidParams("exhaustive search needs 1 <= m <= 16");
  const auto dim = static_cast<Eigen::Index>(ds.dim);

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k)
    for (const auto& f : ds.patterns[k].features) y(f.index, static_cast<Eigen::Index>(k)) = f.value;

  GammaResult best;
  double best_norm = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_point;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> cols;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (1u << k)) cols.push_back(static_cast<Eigen::Index>(k));
    const auto s = static_cast<Eigen::Index>(cols.size());
    if (s > dim + 1) continue;

    Eigen::MatrixXd ys(dim, s);
    for (Eigen::Index i = 0; i < s; ++i) ys.col(i) = y.col(cols[i]);
    // Bordered KKT system [G 1; 1^T 0] [alpha; -mu] = [0; 1].
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
    kkt.topLeftCorner(s, s) = ys.transpose() * ys;
    kkt.block(0, s, s, 1).setOnes();
    kkt.block(s, 0, 1, s).setOnes();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    lu.setThreshold(1e-12);
    if (lu.rank() < s + 1) continue;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
    rhs(s) = 1.0;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd alpha = sol.head(s);
    if (alpha.minCoeff() < -1e-12) continue;
    const Eigen::VectorXd p = ys * alpha;
    const double nrm = p.norm();
    if (nrm < best_norm) {
      best_norm = nrm;
      best_point = p;
      best.support.assign(cols.begin(), cols.end());
      best.coefficients.assign(alpha.data(), alpha.data() + s);
    }
  }

  best.iterations = (1u << m) - 1;
  if (!(best_norm > 1e-12 * ds.radius)) {
    best.separable = false;
    best.gamma_d = 0.0;
    return best;
  }
  best.separable = true;
  best.gamma_d = best_norm;
  best.u.resize(ds.dim);
  for (Eigen::Index i = 0; i < dim; ++i) best.u[i] = best_point(i) / best_norm;
  best.gamma_lower = kernels::serial::min_dot(best.u, 1.0, ds.patterns).value;
  best.gap = best.gamma_d - best.gamma_lower;
  return best;
}

ReferenceRun reference_train(const Dataset& ds, const Hyperparams& hp, Algo algo) {
  if (ds.size() > 10000) throw InvalidParams("reference trainer is limited to m <= 10^4");
  validate(hp, ds, algo);

  const double lambda = algo == Algo::mpcs ? hp.lambda : 0.0;
  const double lq = std::log1p(-hp.eta * lambda);
  auto power = [](double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  };

  ReferenceRun out;
  std::vector<double> w(ds.dim, 0.0);
  std::uint64_t t = 0;
  double powersum = 0.0;
  bool budget = false;
  auto& res = out.result;

  while (!budget) {
    ++res.full_passes;
    std::uint64_t updates = 0;
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const Pattern& p = ds.patterns[k];
      ++res.presentations;
      double dot = 0.0;
      for (const auto& f : p.features) dot += w[f.index] * f.value;

      double thr = hp.b;
      double coef = hp.eta;
      if (algo == Algo::mpcs) {
        thr = hp.b * std::exp(-(static_cast<double>(t) - 1.0) * lq);
        coef = hp.eta * std::exp(-static_cast<double>(t) * lq);
      } else if (algo == Algo::mpvs) {
        const double pw = power(static_cast<double>(t + 1), hp.n);
        thr = hp.b * pw;
        coef = hp.eta * pw;
      }
      if (!(dot <= thr)) continue;
      if (t >= hp.max_updates) {
        budget = true;
        break;
      }
      if (algo == Algo::mpvs) powersum += power(static_cast<double>(t + 1), hp.n);
      for (const auto& f : p.features) w[f.index] += coef * f.value;
      ++t;
      ++updates;
      out.trace.push_back(k);
      out.peak_norm = std::max(out.peak_norm, std::sqrt(dense_sq(w)));
    }
    if (!budget && updates == 0) {
      res.converged = true;
      break;
    }
  }
  res.t_c = t;
  res.state.w = std::move(w);
  res.state.t = t;
  res.state.powersum = powersum;
  res.state.total_presentations = res.presentations;
  return out;
}

}  // namespace mpshrink::oracle
