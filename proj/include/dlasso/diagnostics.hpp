#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlasso/covariance.hpp"

namespace dlasso {

struct SparseEigenReport {
  int m = 0;
  std::vector<int> b_set;
  double phi_min = 0.0;   // min over A of the smallest eigenvalue of M_AA
  double phi_max = 0.0;   // max over A of the largest eigenvalue of M_AA
  double phi_cond = 1.0;  // max over A of the within-A eigenvalue ratio
  bool exact = true;      // false: phi_min/phi_max are one-sided bounds
};

enum class SparseEigenMode { Exact, Sampled };

// Extremal eigenvalues of principal submatrices M_AA over A = B plus m
// indices outside B. By eigenvalue interlacing it suffices to scan the
// largest sets of the family, so exact mode enumerates the C(p-|B|, m)
// completions (refused above 1e6); sampled mode evaluates random subsets plus
// greedily grown adversarial ones and reports one-sided bounds.
SparseEigenReport sparse_eigen(const Eigen::MatrixXd& m_mat, int m,
                               const std::vector<int>& b, SparseEigenMode mode,
                               int trials = 1000, std::uint64_t seed = 1);

struct AssumptionParams {
  int m = 0;
  int k = 0;
  double rho_star = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;
  double eps4 = 0.0;

  double tau_star() const { return (1.0 - eps1 - eps2) * (1.0 - eps1 - eps2); }
  double tau_upper() const { return (1.0 + eps1 + eps2) * (1.0 + eps1 + eps2); }
  void validate() const;

  nlohmann::json to_json() const;
  static AssumptionParams from_json(const nlohmann::json& j);
};

struct Clause {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  double slack = 0.0;  // rhs - lhs
};

struct AssumptionReport {
  std::vector<Clause> clauses;
  double lambda = 0.0;   // eta2^{-1} (1 + eta3) sigma lambda0
  double lambda0 = 0.0;  // sqrt((2/n) log(8p/k))
  int s_star = 0;        // s0 + m + k
  bool all_pass = false;
  nlohmann::json to_json() const;
};

// Evaluates every displayed inequality of the main sample-size assumption:
// the diagonal bound, the sparse-Riesz clause, the rho* bound, lambda0
// sqrt(s*) <= 1, the full-rank count, and the epsilon side conditions. The
// support defaults to the first s0 coordinates when not supplied.
AssumptionReport check_assumption_main(const CovarianceSpec& cov, int n, int p,
                                       int s0, const AssumptionParams& params,
                                       std::vector<int> support = {},
                                       double sigma = 1.0);

// sqrt(fisher/n) * (s0 - nu) * <a0_S, lambda (X_S' X_S / n)^{-1} sgn(beta_S)>,
// the selection-induced bias left in the de-biased estimate when the
// adjustment is nu instead of s0.
double predicted_dof_bias(const Eigen::MatrixXd& x, const std::vector<int>& s,
                          const Eigen::VectorXd& sgn_beta_s,
                          const Eigen::VectorXd& a0, double lambda, double nu,
                          int n, double fisher);

struct SignConsistencyReport {
  std::vector<Clause> clauses;
  double lambda = 0.0;   // gamma^{-1} sigma sqrt(phi_p rho (2/n) log p)
  double rho = 0.0;      // max_j off-support conditional variance
  double c_min = 0.0;    // min_{||u||=1} ||Sigma_SS^{-1/2} u||
  double c_beta = 0.0;   // ||Sigma_SS^{-1/2} sgn(beta_S)|| / sqrt(s0)
  bool all_pass = false;
  nlohmann::json to_json() const;
};

// Classical sufficient conditions for Lasso sign consistency under Gaussian
// design: irrepresentability, sample size, and the minimum-signal bound.
SignConsistencyReport check_sign_consistency(
    const CovarianceSpec& cov, const std::vector<int>& s,
    const Eigen::VectorXd& sgn_beta_s, double min_abs_beta, int n, int p,
    double gamma, double delta, double phi_p, double sigma = 1.0);

struct LinfBoundReport {
  Eigen::VectorXd per_coordinate;
  double global = 0.0;     // rho(Sigma)-based uniform bound
  double rho_sigma = 0.0;  // max_j ||Sigma^{-1} e_j||_1
};

// High-probability per-coordinate bound on |beta_hat_j - beta_j| and its
// uniform rho(Sigma) form. m_bar is a non-explicit constant; callers pick it
// (default 1 in the experiments).
LinfBoundReport linf_bound(const CovarianceSpec& cov, double lambda,
                           double lambda0, int n, int p, int s_star, double m5,
                           double m_bar, double sigma = 1.0);

struct RatesReport {
  double r_lower = 0.0;
  double r_upper = 0.0;
  double k_condition = 0.0;  // ||Sigma^{-1}a0||_1 / ||Sigma^{-1/2}a0||_2, raw
};

// Minimax lower-rate and achievable-rate expressions. c0_u0_l1 is
// ||Sigma^{-1/2}a0||_2 * ||u0||_1; pass NaN when unavailable, which disables
// the dense branch of r_upper and the K ratio.
RatesReport rates(double s0, double s_omega, double rho, double n, double p,
                  double c0_u0_l1);

struct SteinRecord {
  double inner = 0.0;  // eps' X (beta_hat - beta) / sigma^2
  int shat = 0;
};

struct SteinReport {
  double mean_inner = 0.0;
  double mean_shat = 0.0;
  double ratio = 0.0;  // NaN when mean_shat == 0
};

// Degrees-of-freedom identity: the selection size estimates the noise-fit
// inner product on average.
SteinReport stein_dof_check(const std::vector<SteinRecord>& records);

double stein_inner(const Eigen::MatrixXd& x, const Eigen::VectorXd& eps,
                   const Eigen::VectorXd& beta_hat,
                   const Eigen::VectorXd& beta, double sigma);

}  // namespace dlasso
