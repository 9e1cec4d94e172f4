#include "dlasso/lasso.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace dlasso {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double resolve_tol(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   double tol) {
  if (tol > 0.0) return tol;
  const double scale =
      (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
  return std::max(1e-7 * scale, 1e-14);
}

double kkt_violation_at(const Eigen::MatrixXd& x, const Eigen::VectorXd& r,
                        const Eigen::VectorXd& beta, double lambda) {
  const double n = static_cast<double>(x.rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double g = x.col(j).dot(r) / n;
    const double v = beta(j) == 0.0
                         ? std::max(0.0, std::fabs(g) - lambda)
                         : std::fabs(g - lambda * (beta(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

#ifndef NDEBUG
double lasso_objective(const Eigen::VectorXd& r, const Eigen::VectorXd& beta,
                       double lambda) {
  return r.squaredNorm() / (2.0 * static_cast<double>(r.size())) +
         lambda * beta.lpNorm<1>();
}
#endif

}  // namespace

LassoFit lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  const LassoConfig& config) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (y.size() != n) throw std::invalid_argument("lasso_cd: X/y mismatch");
  if (config.lambda < 0) {
    throw std::invalid_argument("lasso_cd: lambda must be >= 0");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("lasso_cd: input contains NaN or Inf");
  }

  const double lambda = config.lambda;
  const double nn = static_cast<double>(n);
  const double tol = resolve_tol(x, y, config.tol);

  LassoFit fit;
  fit.lambda = lambda;
  fit.tol = tol;
  fit.beta = (config.warm_start && config.warm_start->size() == p)
                 ? *config.warm_start
                 : Eigen::VectorXd::Zero(p);

  Eigen::VectorXd colsq(p);
  bool has_zero_col = false;
  for (int j = 0; j < p; ++j) {
    colsq(j) = x.col(j).squaredNorm() / nn;
    if (colsq(j) == 0.0) {
      has_zero_col = true;
      fit.beta(j) = 0.0;  // a zero column never enters the fit
    }
  }
  if (lambda == 0.0 && (has_zero_col || p > n)) fit.unique_solution = false;

  Eigen::VectorXd r = y - x * fit.beta;

#ifndef NDEBUG
  double prev_obj = lasso_objective(r, fit.beta, lambda);
#endif

  int it = 0;
  for (; it < config.max_iter; ++it) {
    double sweep_viol = 0.0;
    for (int j = 0; j < p; ++j) {
      if (colsq(j) == 0.0) continue;
      const double bj = fit.beta(j);
      const double g = x.col(j).dot(r) / nn;
      const double v = bj == 0.0
                           ? std::max(0.0, std::fabs(g) - lambda)
                           : std::fabs(g - lambda * (bj > 0 ? 1.0 : -1.0));
      sweep_viol = std::max(sweep_viol, v);
      const double bnew = soft_threshold(g + colsq(j) * bj, lambda) / colsq(j);
      const double delta = bnew - bj;
      if (delta != 0.0) {
        r -= delta * x.col(j);
        fit.beta(j) = bnew;
      }
    }
#ifndef NDEBUG
    {
      const double obj = lasso_objective(r, fit.beta, lambda);
      assert(obj <= prev_obj + 1e-10 * (1.0 + std::fabs(prev_obj)));
      prev_obj = obj;
    }
#endif
    if (sweep_viol < tol) {
      // sweep-level violations are computed on a moving residual; confirm on
      // a fresh one before declaring convergence
      r = y - x * fit.beta;
      const double exact = kkt_violation_at(x, r, fit.beta, lambda);
      if (exact < tol) {
        fit.converged = true;
        fit.kkt_violation = exact;
        break;
      }
    }
  }
  fit.n_iter = std::min(it + 1, config.max_iter);
  if (!fit.converged) {
    r = y - x * fit.beta;
    fit.kkt_violation = kkt_violation_at(x, r, fit.beta, lambda);
    if (fit.kkt_violation < tol) fit.converged = true;
  }
  fit.residual = std::move(r);
  for (int j = 0; j < p; ++j) {
    if (fit.beta(j) != 0.0) fit.support.push_back(j);
  }
  return fit;
}

double lambda_default(int n, int p, int k_or_s0, double sigma) {
  if (k_or_s0 < 1 || k_or_s0 > p) {
    throw std::invalid_argument("lambda_default: need 1 <= k <= p");
  }
  if (n < 1) throw std::invalid_argument("lambda_default: n must be >= 1");
  return 1.01 * sigma *
         std::sqrt(2.0 * std::log(8.0 * p / static_cast<double>(k_or_s0)) / n);
}

double lambda_univ(int n, int p) {
  if (n < 1 || p < 1) throw std::invalid_argument("lambda_univ: bad sizes");
  return std::sqrt(2.0 * std::log(static_cast<double>(p)) / n);
}

ScaledLassoResult scaled_lasso(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, double lambda0_bar,
                               const LassoConfig& config) {
  if (lambda0_bar <= 0) {
    throw std::invalid_argument("scaled_lasso: lambda0_bar must be positive");
  }
  const double nn = static_cast<double>(x.rows());
  const double y_scale = y.norm() / std::sqrt(nn);
  const double tau_floor = 1e-8 * y_scale;
  constexpr int kMaxOuter = 50;
  constexpr double kRelTol = 1e-8;

  ScaledLassoResult out;
  out.lambda0_bar = lambda0_bar;

  double tau = y_scale;
  if (tau == 0.0) {
    throw degenerate_error("scaled_lasso: zero response");
  }

  LassoConfig inner = config;
  LassoFit fit;
  int sign_flips = 0;
  double last_delta = 0.0;
  for (int it = 0; it < kMaxOuter; ++it) {
    inner.lambda = tau * lambda0_bar;
    fit = lasso_cd(x, y, inner);
    inner.warm_start = fit.beta;
    const double tau_new = fit.residual.norm() / std::sqrt(nn);
    out.n_outer = it + 1;
    if (tau_new < tau_floor) {
      throw degenerate_error(
          "scaled_lasso: residual collapsed (perfect interpolation)");
    }
    const double delta = tau_new - tau;
    if (std::fabs(delta) < kRelTol * tau_new) {
      tau = tau_new;
      break;
    }
    if (last_delta * delta < 0.0) ++sign_flips;
    last_delta = delta;
    // the recursion is not guaranteed monotone; damp once it oscillates
    tau = sign_flips >= 2 ? 0.5 * (tau + tau_new) : tau_new;
  }
  // tau_hat is taken from the returned fit's residual, so the fixed-point
  // identity |tau_hat - ||y - X beta||/sqrt(n)| = 0 holds exactly.
  out.tau_hat = fit.residual.norm() / std::sqrt(nn);
  out.fit = std::move(fit);
  return out;
}

Eigen::MatrixXd project_design(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& a0) {
  Eigen::MatrixXd xq = x;
  const Eigen::VectorXd z = x * u;
  for (Eigen::Index k = 0; k < a0.size(); ++k) {
    if (a0(k) != 0.0) xq.col(k) -= a0(k) * z;
  }
  return xq;
}

namespace {

int count_nonzeros(const Eigen::VectorXd& v) {
  int c = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) ++c;
  }
  return c;
}

int argmax_abs(const Eigen::VectorXd& v) {
  int best = 0;
  double val = std::fabs(v(0));
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::fabs(v(i)) > val) {
      val = std::fabs(v(i));
      best = static_cast<int>(i);
    }
  }
  return best;
}

// ADMM splitting for the general-direction penalty
//   min_c ||z - XQ c||^2/(2n) + penalty ( ||c||_1 + |w'c| ),  c_{j0} = 0,
// with w_k = a0_k / a0_{j0}. The coupled term gets an auxiliary scalar
// t = w'c with augmented term (rho/2)(w'c - t + d)^2 and dual ascent on d.
QLassoResult general_q_lasso(const Eigen::MatrixXd& xq,
                             const Eigen::VectorXd& z,
                             const Eigen::VectorXd& a0, int j0, double penalty,
                             const LassoConfig& config) {
  const int n = static_cast<int>(xq.rows());
  const int p = static_cast<int>(xq.cols());
  const double nn = static_cast<double>(n);

  Eigen::VectorXd w = a0 / a0(j0);
  w(j0) = 0.0;
  const double wnorm = w.norm();

  Eigen::VectorXd colsq(p);
  for (int j = 0; j < p; ++j) colsq(j) = xq.col(j).squaredNorm() / nn;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
  if (config.warm_start && config.warm_start->size() == p) {
    c = *config.warm_start;
    c(j0) = 0.0;
  }
  Eigen::VectorXd r = z - xq * c;
  double g = w.dot(c);
  double t = g;
  double dual = 0.0;
  double rho = penalty * nn;  // splitting parameter, adapted below

  const int max_outer = std::max(500, config.max_iter);

  auto objective = [&](const Eigen::VectorXd& cc, const Eigen::VectorXd& rr) {
    return rr.squaredNorm() / (2.0 * nn) +
           penalty * (cc.lpNorm<1>() + std::fabs(w.dot(cc)));
  };

  QLassoResult out;
  out.penalty = penalty;
  double best_obj = objective(c, r);
  Eigen::VectorXd best_c = c;
  int stall = 0;

  int it = 0;
  for (; it < max_outer; ++it) {
    // c-step: a few coordinate sweeps on the augmented quadratic
    for (int sweep = 0; sweep < 5; ++sweep) {
      double move = 0.0;
      for (int j = 0; j < p; ++j) {
        if (j == j0) continue;
        const double denom = colsq(j) + rho * w(j) * w(j);
        if (denom == 0.0) continue;
        const double cj = c(j);
        const double num = xq.col(j).dot(r) / nn + colsq(j) * cj -
                           rho * w(j) * (g - w(j) * cj - t + dual);
        const double cnew = soft_threshold(num, penalty) / denom;
        const double delta = cnew - cj;
        if (delta != 0.0) {
          r -= delta * xq.col(j);
          g += delta * w(j);
          c(j) = cnew;
          move = std::max(move, std::fabs(delta));
        }
      }
      if (move == 0.0) break;
    }
    // t-step and dual ascent
    const double t_old = t;
    t = soft_threshold(g + dual, penalty / rho);
    dual += g - t;

    const double primal = std::fabs(g - t);
    const double dual_res = rho * std::fabs(t - t_old) * wnorm;
    if (it % 10 == 9) {
      if (primal > 10.0 * dual_res) {
        rho *= 2.0;
        dual *= 0.5;
      } else if (dual_res > 10.0 * primal) {
        rho *= 0.5;
        dual *= 2.0;
      }
    }

    const double obj = objective(c, r);
    if (obj < best_obj - 1e-13 * (1.0 + std::fabs(best_obj))) {
      best_obj = obj;
      best_c = c;
      stall = 0;
    } else {
      ++stall;
    }
    if (primal < 1e-11 * std::max(1.0, std::fabs(t)) && stall >= 10) {
      out.converged = true;
      break;
    }
  }
  out.n_iter = it + 1;

  // gamma = Q c with the gauge c_{j0} = 0: identical to c except that
  // coordinate j0 carries -w'c.
  Eigen::VectorXd gamma = best_c;
  gamma(j0) = -w.dot(best_c);
  const Eigen::VectorXd resid = z - xq * best_c;
  out.kkt_sup = (xq.transpose() * resid).cwiseAbs().maxCoeff() / nn;
  out.gamma = std::move(gamma);
  return out;
}

}  // namespace

QLassoResult q_constrained_lasso_xq(const Eigen::MatrixXd& xq,
                                    const Eigen::VectorXd& z,
                                    const Eigen::VectorXd& a0,
                                    const Eigen::VectorXd& u, double penalty,
                                    const LassoConfig& config) {
  if (std::fabs(u.dot(a0) - 1.0) > 1e-10) {
    throw std::invalid_argument("q_constrained_lasso: <u, a0> must equal 1");
  }
  if (penalty <= 0) {
    throw std::invalid_argument("q_constrained_lasso: penalty must be > 0");
  }
  const int j0 = argmax_abs(a0);

  if (count_nonzeros(a0) == 1) {
    // canonical direction: XQ has column j0 zeroed, so a plain Lasso on XQ
    // never selects it and gamma = b_hat directly
    LassoConfig inner = config;
    inner.lambda = penalty;
    LassoFit fit = lasso_cd(xq, z, inner);
    QLassoResult out;
    out.canonical = true;
    out.penalty = penalty;
    out.converged = fit.converged;
    out.n_iter = fit.n_iter;
    out.gamma = std::move(fit.beta);
    out.kkt_sup = (xq.transpose() * fit.residual).cwiseAbs().maxCoeff() /
                  static_cast<double>(xq.rows());
    return out;
  }
  return general_q_lasso(xq, z, a0, j0, penalty, config);
}

QLassoResult q_constrained_lasso(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& a0,
                                 const Eigen::VectorXd& u, double penalty,
                                 const LassoConfig& config) {
  return q_constrained_lasso_xq(project_design(x, u, a0), z, a0, u, penalty,
                                config);
}

}  // namespace dlasso
