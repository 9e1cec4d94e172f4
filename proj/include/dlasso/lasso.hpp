#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dlasso {

// Thrown when a computation degenerates numerically (perfect interpolation in
// the scaled Lasso, vanishing score normalization, ...). The CLI maps it to
// exit code 3.
class degenerate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LassoConfig {
  double lambda = 0.0;  // penalty level in the (2n)-normalized objective
  int max_iter = 1000;  // full coordinate sweeps
  double tol = 0.0;     // KKT tolerance; 0 selects 1e-7 * ||X'y||_inf / n
  std::optional<Eigen::VectorXd> warm_start;
};

struct LassoFit {
  Eigen::VectorXd beta;
  std::vector<int> support;    // {j : beta_j != 0}, ascending
  Eigen::VectorXd residual;    // y - X beta, recomputed from scratch at exit
  int n_iter = 0;
  bool converged = false;
  double kkt_violation = 0.0;  // max_j dist(x_j'r/n, lambda * d|beta_j|)
  bool unique_solution = true; // false for lambda = 0 with rank-deficient X
  double lambda = 0.0;
  double tol = 0.0;

  int shat() const { return static_cast<int>(support.size()); }
};

// Cyclic coordinate descent for
//   min_b ||y - X b||_2^2 / (2n) + lambda ||b||_1.
// The residual is maintained incrementally and refreshed from scratch before
// the exit KKT check, so the reported violation is exact.
LassoFit lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  const LassoConfig& config);

// 1.01 * sigma * sqrt(2 log(8p/k) / n)
double lambda_default(int n, int p, int k_or_s0, double sigma);
// sqrt(2 log(p) / n)
double lambda_univ(int n, int p);

struct ScaledLassoResult {
  LassoFit fit;        // fit at the final noise level
  double tau_hat = 0;  // ||y - X beta_hat||_2 / sqrt(n), exact for `fit`
  int n_outer = 0;
  double lambda0_bar = 0;
};

// Scaled Lasso: fixed point tau = ||y - X beta_hat(tau * lambda0_bar)||/sqrt(n)
// starting from tau = ||y||/sqrt(n), warm-starting each inner solve. A damped
// update kicks in if the tau sequence starts oscillating.
ScaledLassoResult scaled_lasso(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, double lambda0_bar,
                               const LassoConfig& config);

struct QLassoResult {
  Eigen::VectorXd gamma;  // = Q b_hat; satisfies <a0, gamma> = 0
  bool converged = false;
  int n_iter = 0;
  double kkt_sup = 0.0;   // max_k |(XQ)_k' (z - XQ gamma)| / n
  double penalty = 0.0;
  bool canonical = false;  // a0 proportional to a basis vector
};

// Solves  min_b ||z - XQ b||^2/(2n) + penalty ||Q b||_1  with Q = I - u a0'
// and returns gamma = Q b_hat. For canonical a0 this reduces exactly to a
// standard Lasso with column j0 removed; for general a0 the coordinate b_j0
// is a gauge freedom (Q e_j0 = 0), fixing it at zero turns ||Q b||_1 into a
// separable part plus one coupled absolute term that is handled by an
// ADMM-style splitting.
QLassoResult q_constrained_lasso(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& a0,
                                 const Eigen::VectorXd& u, double penalty,
                                 const LassoConfig& config);

// Same problem with the projected design XQ = X - (Xu) a0' already formed.
QLassoResult q_constrained_lasso_xq(const Eigen::MatrixXd& xq,
                                    const Eigen::VectorXd& z,
                                    const Eigen::VectorXd& a0,
                                    const Eigen::VectorXd& u, double penalty,
                                    const LassoConfig& config);

// XQ = X - (X u) a0'; exploits sparsity of a0.
Eigen::MatrixXd project_design(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& a0);

}  // namespace dlasso
