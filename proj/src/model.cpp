#include "dlasso/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dlasso/rng.hpp"

namespace dlasso {

std::vector<int> draw_random_signs(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> signs(count);
  for (int i = 0; i < count; ++i) {
    signs[i] = rng.rademacher() > 0 ? 1 : -1;
  }
  return signs;
}

RegressionProblem generate_problem(const CovarianceSpec& cov,
                                   const BetaSpec& spec, double sigma, int n,
                                   std::uint64_t seed) {
  const int p = cov.dim();
  if (n < 1) throw std::invalid_argument("generate_problem: n must be >= 1");
  if (sigma < 0) {
    throw std::invalid_argument("generate_problem: sigma must be >= 0");
  }
  const auto s0 = spec.support.size();
  if (spec.amplitudes.size() != static_cast<Eigen::Index>(s0)) {
    throw std::invalid_argument(
        "generate_problem: amplitudes and support sizes differ");
  }
  for (int j : spec.support) {
    if (j < 0 || j >= p) {
      throw std::invalid_argument("generate_problem: support index out of [p]");
    }
  }
  if (!spec.amplitudes.allFinite()) {
    throw std::invalid_argument("generate_problem: amplitudes must be finite");
  }
  if (spec.sign_rule == SignRule::Fixed && spec.signs.size() != s0) {
    throw std::invalid_argument("generate_problem: fixed rule needs signs");
  }

  Rng rng(seed);

  // Draw order is fixed: signs, then X row by row, then the noise.
  std::vector<int> signs;
  if (spec.sign_rule == SignRule::IidRandom) {
    signs.resize(s0);
    for (std::size_t i = 0; i < s0; ++i) {
      signs[i] = rng.rademacher() > 0 ? 1 : -1;
    }
  } else {
    signs = spec.signs;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (std::size_t i = 0; i < s0; ++i) {
    beta(spec.support[i]) = signs[i] * spec.amplitudes(i);
  }

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd row(p);
  const bool needs_transform = cov.kind() != CovKind::Identity;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) row(j) = rng.normal();
    x.row(i) = needs_transform ? cov.sqrt_times(row).transpose()
                               : row.transpose();
  }

  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps(i) = sigma * rng.normal();

  RegressionProblem problem;
  problem.x = std::move(x);
  problem.y = problem.x * beta + eps;

  Truth truth;
  truth.sigma = sigma;
  for (int j = 0; j < p; ++j) {
    if (beta(j) != 0.0) truth.support.push_back(j);
  }
  truth.beta = std::move(beta);
  problem.truth = std::move(truth);
  return problem;
}

namespace {
Eigen::VectorXd sign_vector(const Eigen::VectorXd& beta) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) > 0) {
      s(j) = 1.0;
    } else if (beta(j) < 0) {
      s(j) = -1.0;
    }
  }
  return s;
}
}  // namespace

TargetFunctional direction_sgn_beta(const Eigen::VectorXd& beta,
                                    const CovarianceSpec& cov,
                                    bool normalize) {
  if (beta.size() != cov.dim()) {
    throw std::invalid_argument("direction_sgn_beta: dimension mismatch");
  }
  Eigen::VectorXd s = sign_vector(beta);
  const double s0 = s.cwiseAbs().sum();
  if (s0 == 0.0) {
    throw std::invalid_argument("direction_sgn_beta: beta is zero");
  }
  TargetFunctional t;
  if (normalize) {
    t.a0 = s / std::sqrt(cov.quad_inv(s));
    t.label = "sgn(beta) normalized";
  } else {
    t.a0 = std::move(s);
    t.label = "sgn(beta)";
  }
  return t;
}

TargetFunctional direction_sgn_beta_sigma_weighted(const Eigen::VectorXd& beta,
                                                   const CovarianceSpec& cov) {
  if (beta.size() != cov.dim()) {
    throw std::invalid_argument(
        "direction_sgn_beta_sigma_weighted: dimension mismatch");
  }
  Eigen::VectorXd s = sign_vector(beta);
  const double s0 = s.cwiseAbs().sum();
  if (s0 == 0.0) {
    throw std::invalid_argument(
        "direction_sgn_beta_sigma_weighted: beta is zero");
  }
  TargetFunctional t;
  t.a0 = cov.sigma_times(s) / std::sqrt(s0);
  t.label = "Sigma sgn(beta)/sqrt(s0)";
  return t;
}

TargetFunctional direction_canonical(int j, const CovarianceSpec& cov,
                                     bool scaled) {
  if (j < 0 || j >= cov.dim()) {
    throw std::invalid_argument("direction_canonical: index out of range");
  }
  TargetFunctional t;
  t.a0 = Eigen::VectorXd::Zero(cov.dim());
  t.a0(j) = scaled ? 1.0 / cov.inv_diag(j) : 1.0;
  t.label = (scaled ? "e_j scaled, j=" : "e_j, j=") + std::to_string(j + 1);
  return t;
}

}  // namespace dlasso
