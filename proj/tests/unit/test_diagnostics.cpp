#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dlasso/diagnostics.hpp"
#include "dlasso/lasso.hpp"
#include "dlasso/model.hpp"
#include "dlasso/rng.hpp"

using namespace dlasso;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
AssumptionParams passing_params() {
  AssumptionParams p;
  p.m = 120;
  p.k = 4;
  p.rho_star = 0.5;
  p.eta2 = 0.25;
  p.eta3 = 0.1;
  p.eps1 = 0.25;
  p.eps2 = 0.25;
  p.eps3 = 0.0039;
  p.eps4 = 0.25 * 0.25 / 8.0 - 0.0039;
  return p;
}
}  // namespace

TEST_CASE("sparse_eigen on the identity") {
  const MatrixXd id = MatrixXd::Identity(8, 8);
  const auto rep = sparse_eigen(id, 3, {0, 1}, SparseEigenMode::Exact);
  CHECK(rep.exact);
  CHECK(rep.phi_min == doctest::Approx(1.0));
  CHECK(rep.phi_max == doctest::Approx(1.0));
  CHECK(rep.phi_cond == doctest::Approx(1.0));
}

TEST_CASE("sparse_eigen 2x2 correlated") {
  const double rho = 0.35;
  MatrixXd m(2, 2);
  m << 1.0, rho, rho, 1.0;
  const auto rep = sparse_eigen(m, 2, {}, SparseEigenMode::Exact);
  CHECK(rep.phi_min == doctest::Approx(1.0 - rho).epsilon(1e-12));
  CHECK(rep.phi_max == doctest::Approx(1.0 + rho).epsilon(1e-12));
  CHECK(rep.phi_cond ==
        doctest::Approx((1.0 + rho) / (1.0 - rho)).epsilon(1e-12));
}

TEST_CASE("sampled sparse_eigen covers small instances completely") {
  // 6x6 SPD, m = 3: 20 subsets; 1000 random draws hit them all
  Rng rng(71);
  MatrixXd a(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) a(i, j) = rng.normal();
  }
  const MatrixXd spd = a * a.transpose() / 6.0 + MatrixXd::Identity(6, 6);
  const auto exact = sparse_eigen(spd, 3, {}, SparseEigenMode::Exact);
  const auto sampled = sparse_eigen(spd, 3, {}, SparseEigenMode::Sampled, 1000, 5);
  CHECK_FALSE(sampled.exact);
  CHECK(sampled.phi_min == doctest::Approx(exact.phi_min).epsilon(1e-12));
  CHECK(sampled.phi_max == doctest::Approx(exact.phi_max).epsilon(1e-12));
}

TEST_CASE("sampled bounds bracket the exact values") {
  Rng rng(72);
  for (int trial = 0; trial < 5; ++trial) {
    MatrixXd a(7, 7);
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) a(i, j) = rng.normal();
    }
    const MatrixXd spd = a * a.transpose() / 7.0 + 0.5 * MatrixXd::Identity(7, 7);
    const auto exact = sparse_eigen(spd, 3, {1}, SparseEigenMode::Exact);
    const auto sampled =
        sparse_eigen(spd, 3, {1}, SparseEigenMode::Sampled, 10, 100 + trial);
    CHECK(sampled.phi_min >= exact.phi_min - 1e-12);
    CHECK(sampled.phi_max <= exact.phi_max + 1e-12);
    CHECK(sampled.phi_cond <= exact.phi_cond + 1e-12);
  }
}

TEST_CASE("phi_cond is nondecreasing in m") {
  Rng rng(73);
  MatrixXd a(7, 7);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) a(i, j) = rng.normal();
  }
  const MatrixXd spd = a * a.transpose() / 7.0 + 0.3 * MatrixXd::Identity(7, 7);
  double last = 0.0;
  for (int m = 1; m <= 5; ++m) {
    const auto rep = sparse_eigen(spd, m, {}, SparseEigenMode::Exact);
    CHECK(rep.phi_cond >= last - 1e-12);
    last = rep.phi_cond;
  }
}

TEST_CASE("exact mode refuses combinatorial blow-ups") {
  const MatrixXd id = MatrixXd::Identity(200, 200);
  CHECK_THROWS_AS(sparse_eigen(id, 100, {}, SparseEigenMode::Exact),
                  std::invalid_argument);
}

TEST_CASE("assumption checker: a parameter set where every clause holds") {
  const auto cov = CovarianceSpec::identity(600);
  const auto rep =
      check_assumption_main(cov, 100000, 600, 4, passing_params());
  for (const auto& c : rep.clauses) {
    INFO(c.name, " lhs=", c.lhs, " rhs=", c.rhs);
    CHECK(c.pass);
  }
  CHECK(rep.all_pass);
  CHECK(rep.s_star == 128);
}

TEST_CASE("assumption checker: epsilon identity violation fails its clause") {
  auto params = passing_params();
  params.eps4 += 1e-6;
  const auto cov = CovarianceSpec::identity(600);
  const auto rep = check_assumption_main(cov, 100000, 600, 4, params);
  bool found = false;
  for (const auto& c : rep.clauses) {
    if (c.name == "eps3_plus_eps4_identity") {
      CHECK_FALSE(c.pass);
      found = true;
    }
  }
  CHECK(found);
  CHECK_FALSE(rep.all_pass);
}

TEST_CASE("assumption checker: full-rank count fails when n is too small") {
  // p = 50, s0 = 5, m + k = 40, n = 30: 2*40 + 5 + 1 = 86 > 29
  AssumptionParams params;
  params.m = 35;
  params.k = 5;
  params.rho_star = 0.1;
  params.eta2 = 0.25;
  params.eta3 = 0.1;
  params.eps1 = 0.25;
  params.eps2 = 0.25;
  params.eps3 = 0.0039;
  params.eps4 = 0.25 * 0.25 / 8.0 - 0.0039;
  const auto cov = CovarianceSpec::identity(50);
  const auto rep = check_assumption_main(cov, 30, 50, 5, params);
  for (const auto& c : rep.clauses) {
    if (c.name == "full_rank_count") {
      CHECK(c.lhs == doctest::Approx(86.0));
      CHECK_FALSE(c.pass);
    }
  }
  CHECK_FALSE(rep.all_pass);
}

TEST_CASE("predicted dof bias: orthonormal design closed form") {
  // X_S'X_S/n = I, a0 = sgn/sqrt(s0), F = 1, nu = 0 gives
  // lambda s0^{3/2} / sqrt(n) exactly
  Rng rng(74);
  const int n = 64, s0 = 4, p = 10;
  MatrixXd raw(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) raw(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<MatrixXd> qr(raw);
  MatrixXd x = qr.householderQ() * MatrixXd::Identity(n, p) * std::sqrt(double(n));

  std::vector<int> support{0, 1, 2, 3};
  VectorXd sgn(s0);
  sgn << 1, -1, 1, 1;
  VectorXd a0 = VectorXd::Zero(p);
  for (int i = 0; i < s0; ++i) a0(support[i]) = sgn(i) / std::sqrt(double(s0));
  const double lambda = 0.21;

  const double v = predicted_dof_bias(x, support, sgn, a0, lambda, 0.0, n, 1.0);
  CHECK(v == doctest::Approx(lambda * std::pow(double(s0), 1.5) /
                             std::sqrt(double(n)))
                 .epsilon(1e-10));
  // vanishes at nu = s0, flips sign past it, linear in lambda
  CHECK(predicted_dof_bias(x, support, sgn, a0, lambda, s0, n, 1.0) ==
        doctest::Approx(0.0));
  CHECK(predicted_dof_bias(x, support, sgn, a0, lambda, 2.0 * s0, n, 1.0) ==
        doctest::Approx(-v).epsilon(1e-10));
  CHECK(predicted_dof_bias(x, support, sgn, a0, 2.0 * lambda, 0.0, n, 1.0) ==
        doctest::Approx(2.0 * v).epsilon(1e-10));
}

TEST_CASE("predicted dof bias rejects singular gram matrices") {
  MatrixXd x(4, 3);
  x.setOnes();
  x.col(1) = x.col(0);
  VectorXd sgn(2);
  sgn << 1, 1;
  VectorXd a0 = VectorXd::Ones(3);
  CHECK_THROWS_AS(predicted_dof_bias(x, {0, 1}, sgn, a0, 0.1, 0.0, 4, 1.0),
                  degenerate_error);
}

TEST_CASE("sign consistency: identity covariance") {
  const auto cov = CovarianceSpec::identity(12);
  VectorXd sgn(3);
  sgn << 1, -1, 1;
  const auto rep = check_sign_consistency(cov, {0, 1, 2}, sgn, 1.0, 2000, 12,
                                          0.5, 0.1, 2.0);
  CHECK(rep.c_beta == doctest::Approx(1.0));
  CHECK(rep.c_min == doctest::Approx(1.0));
  for (const auto& c : rep.clauses) {
    if (c.name == "irrepresentability") {
      CHECK(c.lhs == doctest::Approx(0.0));
      CHECK(c.rhs == doctest::Approx(0.5));
      CHECK(c.pass);
    }
  }
}

TEST_CASE("sign consistency: strong correlation violates irrepresentability") {
  // equicorrelated 3x3 with rho = 0.9, S = {0}: LHS = 0.9
  MatrixXd sigma = MatrixXd::Constant(3, 3, 0.9);
  for (int i = 0; i < 3; ++i) sigma(i, i) = 1.0;
  const auto cov = CovarianceSpec::explicit_matrix(sigma);
  VectorXd sgn(1);
  sgn << 1;
  const auto rep =
      check_sign_consistency(cov, {0}, sgn, 1.0, 500, 3, 0.2, 0.1, 2.0);
  for (const auto& c : rep.clauses) {
    if (c.name == "irrepresentability") {
      CHECK(c.lhs == doctest::Approx(0.9).epsilon(1e-10));
      CHECK_FALSE(c.pass);  // 0.9 > 1 - 0.2
    }
  }
}

TEST_CASE("sign consistency: structural covariance matches dense recompute") {
  const int p = 30, s0 = 8;
  VectorXd s_vec = VectorXd::Zero(p);
  for (int i = 0; i < s0; ++i) s_vec(i) = (i % 2 == 0) ? 1.0 : -1.0;
  const auto structural =
      CovarianceSpec::rank_one_perturbed_inverse(p, s0, 0.25, s_vec);
  const auto dense = CovarianceSpec::explicit_matrix(structural.dense_sigma());
  std::vector<int> support;
  VectorXd sgn(s0);
  for (int i = 0; i < s0; ++i) {
    support.push_back(i);
    sgn(i) = s_vec(i);
  }
  const auto r1 =
      check_sign_consistency(structural, support, sgn, 0.8, 1000, p, 0.3, 0.1, 2.0);
  const auto r2 =
      check_sign_consistency(dense, support, sgn, 0.8, 1000, p, 0.3, 0.1, 2.0);
  REQUIRE(r1.clauses.size() == r2.clauses.size());
  for (std::size_t i = 0; i < r1.clauses.size(); ++i) {
    CHECK(r1.clauses[i].lhs == doctest::Approx(r2.clauses[i].lhs).epsilon(1e-10));
    CHECK(r1.clauses[i].rhs == doctest::Approx(r2.clauses[i].rhs).epsilon(1e-10));
  }
  CHECK(r1.c_beta == doctest::Approx(r2.c_beta).epsilon(1e-10));
  CHECK(r1.rho == doctest::Approx(r2.rho).epsilon(1e-10));
}

TEST_CASE("linf bound: identity covariance is coordinate independent") {
  const auto cov = CovarianceSpec::identity(20);
  const auto rep = linf_bound(cov, 0.18, 0.17, 400, 20, 24, 1.005, 1.0);
  CHECK(rep.rho_sigma == doctest::Approx(1.0));
  for (int j = 1; j < 20; ++j) {
    CHECK(rep.per_coordinate(j) == doctest::Approx(rep.per_coordinate(0)));
  }
  // monotone in lambda and s_star
  const auto more_lambda = linf_bound(cov, 0.25, 0.17, 400, 20, 24, 1.005, 1.0);
  CHECK(more_lambda.per_coordinate(0) > rep.per_coordinate(0));
  const auto more_sstar = linf_bound(cov, 0.18, 0.17, 400, 20, 48, 1.005, 1.0);
  CHECK(more_sstar.per_coordinate(0) > rep.per_coordinate(0));
  CHECK_THROWS_AS(linf_bound(cov, 0.18, 0.17, 20, 20, 24, 1.005, 1.0),
                  std::invalid_argument);
}

TEST_CASE("rates: formula evaluation") {
  const auto r = rates(1, 1, 1, 100, 1000, std::nan(""));
  CHECK(r.r_lower == doctest::Approx(0.6907755278982137).epsilon(1e-12));
  CHECK(r.r_upper == doctest::Approx(0.6907755278982137).epsilon(1e-12));

  // dense branch saturates the lower rate
  const auto sat = rates(1e9, 1e9, 1, 100, 1000, std::nan(""));
  CHECK(sat.r_lower ==
        doctest::Approx(1.02 * std::sqrt(std::log(1000.0))).epsilon(1e-12));

  // r_upper never exceeds the sparse branch and k ratio is passed through
  const auto with_k = rates(3, 2, 1.5, 400, 600, 7.5);
  CHECK(with_k.r_upper <= 2.0 * std::log(600.0) / 20.0 + 1e-12);
  CHECK(with_k.k_condition == doctest::Approx(7.5));
}

TEST_CASE("stein check: oracle fits give zero on both sides") {
  std::vector<SteinRecord> recs(10);
  const auto rep = stein_dof_check(recs);
  CHECK(rep.mean_inner == doctest::Approx(0.0));
  CHECK(rep.mean_shat == doctest::Approx(0.0));
  CHECK(std::isnan(rep.ratio));
}

TEST_CASE("stein check: huge penalty keeps the inner product centered") {
  // beta_hat = 0 for all replications: inner = -eps'X beta / sigma^2 has
  // mean zero by independence, shat = 0
  const int n = 100, p = 20, reps = 300;
  const auto cov = CovarianceSpec::identity(p);
  BetaSpec spec;
  spec.support = {0, 1};
  spec.amplitudes = VectorXd::Constant(2, 1.0);
  spec.sign_rule = SignRule::IidRandom;
  std::vector<SteinRecord> recs;
  for (int r = 0; r < reps; ++r) {
    const auto prob = generate_problem(cov, spec, 1.0, n, 7000 + r);
    const VectorXd eps = prob.y - prob.x * prob.truth->beta;
    SteinRecord rec;
    rec.inner = stein_inner(prob.x, eps, VectorXd::Zero(p), prob.truth->beta,
                            1.0);
    rec.shat = 0;
    recs.push_back(rec);
  }
  const auto rep = stein_dof_check(recs);
  CHECK(rep.mean_shat == 0.0);
  CHECK(std::fabs(rep.mean_inner) < 3.0 * std::sqrt(2.0 * n / double(reps)));
}

TEST_CASE("assumption params JSON round trip and validation") {
  const auto p = passing_params();
  const auto q = AssumptionParams::from_json(p.to_json());
  CHECK(q.m == p.m);
  CHECK(q.eps3 == doctest::Approx(p.eps3));
  AssumptionParams bad = p;
  bad.eps1 = 0.7;
  bad.eps2 = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
