#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlasso/covariance.hpp"

namespace dlasso {

struct Truth {
  Eigen::VectorXd beta;
  double sigma = 0.0;
  std::vector<int> support;  // nonzero coordinates of beta, ascending
};

struct RegressionProblem {
  Eigen::MatrixXd x;  // n x p design
  Eigen::VectorXd y;
  std::optional<Truth> truth;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }
};

enum class SignRule { Fixed, IidRandom };

struct BetaSpec {
  std::vector<int> support;
  Eigen::VectorXd amplitudes;     // |beta_j| per support entry
  SignRule sign_rule = SignRule::Fixed;
  std::vector<int> signs;         // +-1 per support entry when Fixed
};

// The first draws of Rng(seed) are the random coefficient signs; callers that
// need the signs before generate_problem (e.g. to build a sign-dependent
// covariance) can reproduce them with this helper.
std::vector<int> draw_random_signs(int count, std::uint64_t seed);

// Samples X with iid N(0, Sigma) rows, eps iid N(0, sigma^2), y = X beta + eps.
// Fully deterministic given the seed.
RegressionProblem generate_problem(const CovarianceSpec& cov,
                                   const BetaSpec& spec, double sigma, int n,
                                   std::uint64_t seed);

struct TargetFunctional {
  Eigen::VectorXd a0;
  std::string label;
};

// a0 supported on supp(beta), proportional to sgn(beta) there; with normalize
// the result satisfies ||Sigma^{-1/2} a0||_2 = 1.
TargetFunctional direction_sgn_beta(const Eigen::VectorXd& beta,
                                    const CovarianceSpec& cov, bool normalize);

// a0 = Sigma * sgn(beta) / sqrt(s0), the covariance-weighted sign direction.
TargetFunctional direction_sgn_beta_sigma_weighted(const Eigen::VectorXd& beta,
                                                   const CovarianceSpec& cov);

// a0 = e_j, or e_j / (Sigma^{-1})_{jj} when scaled.
TargetFunctional direction_canonical(int j, const CovarianceSpec& cov,
                                     bool scaled);

}  // namespace dlasso
