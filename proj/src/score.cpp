#include "dlasso/score.hpp"

#include <cmath>
#include <stdexcept>

namespace dlasso {

IdealScore ideal_score(const CovarianceSpec& cov,
                       const TargetFunctional& target, const Eigen::MatrixXd& x,
                       double sigma) {
  const Eigen::VectorXd& a0 = target.a0;
  if (a0.size() != cov.dim() || x.cols() != cov.dim()) {
    throw std::invalid_argument("ideal_score: dimension mismatch");
  }
  if (a0.norm() == 0.0) {
    throw std::invalid_argument("ideal_score: a0 is zero");
  }
  if (sigma <= 0.0) {
    throw std::invalid_argument("ideal_score: sigma must be positive");
  }
  const Eigen::VectorXd inv_a0 = cov.inv_times(a0);
  const double quad = a0.dot(inv_a0);
  if (!(quad > 0.0)) {
    throw degenerate_error("ideal_score: <a0, Sigma^{-1} a0> is not positive");
  }
  IdealScore s;
  s.a0 = a0;
  s.u0 = inv_a0 / quad;
  s.z0 = x * s.u0;
  s.c0 = std::sqrt(quad);
  s.fisher = 1.0 / (sigma * sigma * quad);
  s.sigma = sigma;
  return s;
}

namespace {
int argmax_abs_smallest_tie(const Eigen::VectorXd& v) {
  int best = 0;
  double val = std::fabs(v(0));
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::fabs(v(i)) > val) {  // strict: ties keep the smallest index
      val = std::fabs(v(i));
      best = static_cast<int>(i);
    }
  }
  return best;
}

int count_nonzeros(const Eigen::VectorXd& v) {
  int c = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) ++c;
  }
  return c;
}
}  // namespace

EstimatedScore estimated_score(const Eigen::MatrixXd& x,
                               const TargetFunctional& target,
                               const EstimatedScoreConfig& config) {
  const Eigen::VectorXd& a0 = target.a0;
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (a0.size() != p) {
    throw std::invalid_argument("estimated_score: dimension mismatch");
  }
  if (a0.norm() == 0.0) {
    throw std::invalid_argument("estimated_score: a0 is zero");
  }

  EstimatedScore s;
  s.a0 = a0;
  s.j0 = argmax_abs_smallest_tie(a0);
  s.u = Eigen::VectorXd::Zero(p);
  s.u(s.j0) = 1.0 / a0(s.j0);
  s.z = x.col(s.j0) / a0(s.j0);
  s.canonical = count_nonzeros(a0) == 1;

  const Eigen::MatrixXd xq = project_design(x, s.u, a0);

  double col_bound = config.col_bound;
  if (col_bound <= 0.0) {
    double worst = 0.0;
    for (int k = 0; k < p; ++k) {
      worst = std::max(worst, xq.col(k).norm() / std::sqrt(double(n)));
    }
    col_bound = std::max(2.01, worst);
  }
  s.col_bound = col_bound;
  const double lam_univ = lambda_univ(n, p);
  const double z_scale = s.z.norm() / std::sqrt(double(n));
  constexpr double kTauFloor = 1e-6;  // keeps the penalty positive

  LassoConfig inner = config.lasso;
  QLassoResult q;
  double tau = 0.0;

  if (config.tau_mode == TauMode::Fixed) {
    tau = config.tau_fixed;
    s.penalty = std::max(tau, kTauFloor) * col_bound * lam_univ;
    q = q_constrained_lasso_xq(xq, s.z, a0, s.u, s.penalty, inner);
    s.n_outer = 1;
  } else {
    // scaled-Lasso recursion on the projected regression
    tau = z_scale;
    if (tau == 0.0) {
      throw degenerate_error("estimated_score: zero score vector");
    }
    constexpr int kMaxOuter = 50;
    constexpr double kRelTol = 1e-8;
    const double tau_degenerate = 1e-8 * z_scale;
    int sign_flips = 0;
    double last_delta = 0.0;
    for (int it = 0; it < kMaxOuter; ++it) {
      s.penalty = std::max(tau, kTauFloor) * col_bound * lam_univ;
      q = q_constrained_lasso_xq(xq, s.z, a0, s.u, s.penalty, inner);
      inner.warm_start = q.gamma;
      const double tau_new = (s.z - xq * q.gamma).norm() / std::sqrt(double(n));
      s.n_outer = it + 1;
      if (tau_new < tau_degenerate) {
        throw degenerate_error(
            "estimated_score: score regression interpolates (tau collapsed)");
      }
      const double delta = tau_new - tau;
      if (std::fabs(delta) < kRelTol * tau_new) {
        tau = tau_new;
        break;
      }
      if (last_delta * delta < 0.0) ++sign_flips;
      last_delta = delta;
      tau = sign_flips >= 2 ? 0.5 * (tau + tau_new) : tau_new;
    }
  }

  s.gamma_hat = q.gamma;
  s.converged = q.converged;
  s.z_hat = s.z - xq * s.gamma_hat;
  s.tau_hat = config.tau_mode == TauMode::Fixed
                  ? tau
                  : s.z_hat.norm() / std::sqrt(double(n));
  s.inner_zz = s.z_hat.dot(s.z);
  s.norm_zhat_sq = s.z_hat.squaredNorm();
  return s;
}

ScoreConditionReport check_score_conditions(const EstimatedScore& score,
                                            const Eigen::MatrixXd& xq) {
  const double n = static_cast<double>(xq.rows());
  ScoreConditionReport r;
  r.kkt_sup = (xq.transpose() * score.z_hat).cwiseAbs().maxCoeff() / n;
  // subgradients of ||Q b||_1 are bounded by 1 for canonical directions and
  // by 2 in sup-norm in general
  r.bound = score.penalty * (score.canonical ? 1.0 : 2.0);
  r.pass = r.kkt_sup <= r.bound * (1.0 + 1e-6);
  r.tau_hat = score.tau_hat;
  r.penalty = score.penalty;
  r.lambda_univ = lambda_univ(static_cast<int>(xq.rows()),
                              static_cast<int>(xq.cols()));
  r.gamma_l0 = 0.0;
  for (Eigen::Index i = 0; i < score.gamma_hat.size(); ++i) {
    if (score.gamma_hat(i) != 0.0) r.gamma_l0 += 1.0;
  }
  r.gamma_l1 = score.gamma_hat.lpNorm<1>();
  return r;
}

}  // namespace dlasso
