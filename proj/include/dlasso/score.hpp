#pragma once

#include <Eigen/Dense>

#include "dlasso/covariance.hpp"
#include "dlasso/lasso.hpp"
#include "dlasso/model.hpp"

namespace dlasso {

// Efficient score for <a0, beta> when Sigma is known:
//   u0 = Sigma^{-1} a0 / <a0, Sigma^{-1} a0>,  z0 = X u0,
//   c0 = ||Sigma^{-1/2} a0||_2,  fisher = 1 / (sigma^2 c0^2).
struct IdealScore {
  Eigen::VectorXd a0;
  Eigen::VectorXd u0;
  Eigen::VectorXd z0;
  double c0 = 0.0;
  double fisher = 0.0;
  double sigma = 0.0;

  // Q0 h = h - u0 <a0, h>, applied without materializing the projector.
  Eigen::VectorXd project(const Eigen::VectorXd& h) const {
    return h - u0 * a0.dot(h);
  }
  Eigen::MatrixXd q0_dense() const {
    return Eigen::MatrixXd::Identity(a0.size(), a0.size()) -
           u0 * a0.transpose();
  }
};

IdealScore ideal_score(const CovarianceSpec& cov, const TargetFunctional& target,
                       const Eigen::MatrixXd& x, double sigma);

enum class TauMode { ScaledLasso, Fixed };

struct EstimatedScoreConfig {
  TauMode tau_mode = TauMode::ScaledLasso;
  double tau_fixed = 0.0;   // used when tau_mode == Fixed
  double col_bound = 0.0;   // A; 0 selects max(2.01, max_k ||XQ e_k||/sqrt(n))
  LassoConfig lasso;        // tolerance/iteration budget for the inner solves
};

// Score estimated from the data when Sigma is unknown, via the projected
// nodewise regression z = XQ gamma + noise with u = e_{j0}/(a0)_{j0}.
struct EstimatedScore {
  Eigen::VectorXd a0;
  Eigen::VectorXd u;
  Eigen::VectorXd gamma_hat;  // <a0, gamma_hat> = 0
  Eigen::VectorXd z;          // X u
  Eigen::VectorXd z_hat;      // z - XQ gamma_hat
  int j0 = 0;
  double tau_hat = 0.0;
  double inner_zz = 0.0;      // <z_hat, z>
  double norm_zhat_sq = 0.0;  // ||z_hat||^2
  double penalty = 0.0;       // tau_hat * A * lambda_univ actually used
  double col_bound = 0.0;     // the A that was used
  bool converged = false;
  int n_outer = 0;
  bool canonical = false;

  Eigen::VectorXd project(const Eigen::VectorXd& h) const {
    return h - u * a0.dot(h);
  }
};

EstimatedScore estimated_score(const Eigen::MatrixXd& x,
                               const TargetFunctional& target,
                               const EstimatedScoreConfig& config);

struct ScoreConditionReport {
  double kkt_sup = 0.0;   // max_k |z_hat' (XQ) e_k| / n
  double bound = 0.0;     // KKT bound it must satisfy
  bool pass = false;
  double tau_hat = 0.0;
  double penalty = 0.0;
  double lambda_univ = 0.0;
  double gamma_l0 = 0.0;  // inputs to the l1 estimation rate, for display
  double gamma_l1 = 0.0;
};

ScoreConditionReport check_score_conditions(const EstimatedScore& score,
                                            const Eigen::MatrixXd& xq);

}  // namespace dlasso
