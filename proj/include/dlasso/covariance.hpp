#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dlasso {

enum class CovKind { Identity, RankOnePerturbedInverse, Explicit };

// Population covariance with structural access to Sigma, Sigma^{-1} and their
// symmetric square roots.
//
// The rank-one-perturbed-inverse variant represents
//   Sigma^{-1} = I + c (s e_j' + e_j s')
// through the eigenpairs of the rank-two perturbation, so every product is
// O(p) and exact; Sigma is never densely inverted. Explicit matrices are
// eigendecomposed once at construction, which also serves as the SPD check.
class CovarianceSpec {
 public:
  static CovarianceSpec identity(int p);
  static CovarianceSpec rank_one_perturbed_inverse(int p, int j, double c,
                                                   const Eigen::VectorXd& s);
  static CovarianceSpec explicit_matrix(const Eigen::MatrixXd& sigma);

  int dim() const { return p_; }
  CovKind kind() const { return kind_; }

  Eigen::VectorXd sigma_times(const Eigen::VectorXd& v) const;
  Eigen::VectorXd inv_times(const Eigen::VectorXd& v) const;
  Eigen::VectorXd sqrt_times(const Eigen::VectorXd& v) const;
  Eigen::VectorXd inv_sqrt_times(const Eigen::VectorXd& v) const;

  // <a, Sigma^{-1} a>
  double quad_inv(const Eigen::VectorXd& a) const;
  // (Sigma^{-1})_{jj}
  double inv_diag(int j) const;
  double sigma_diag_max() const;
  double min_eigenvalue() const;  // smallest eigenvalue of Sigma

  Eigen::MatrixXd dense_sigma() const;
  Eigen::MatrixXd dense_inv() const;

  // JSON wire format; "j" is 1-based on the wire.
  nlohmann::json to_json() const;
  static CovarianceSpec from_json(const nlohmann::json& j);

  int perturb_index() const { return j_; }
  double perturb_scale() const { return c_; }
  const Eigen::VectorXd& perturb_signs() const { return s_; }

 private:
  CovarianceSpec() = default;
  void build_modes();

  CovKind kind_ = CovKind::Identity;
  int p_ = 0;

  // rank-one-perturbed-inverse parameters and the eigenpairs (mu_i, u_i) of
  // the perturbation: Sigma^{-1} = I + sum_i mu_i u_i u_i'
  int j_ = -1;
  double c_ = 0.0;
  Eigen::VectorXd s_;
  std::vector<std::pair<double, Eigen::VectorXd>> modes_;

  // explicit: eigendecomposition of Sigma
  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_;
};

}  // namespace dlasso
