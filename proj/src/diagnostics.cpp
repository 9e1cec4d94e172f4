#include "dlasso/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "dlasso/lasso.hpp"
#include "dlasso/rng.hpp"
#include "dlasso/stats.hpp"

namespace dlasso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& a) {
  Eigen::MatrixXd out(a.size(), a.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < a.size(); ++c) {
      out(r, c) = m(a[r], a[c]);
    }
  }
  return out;
}

struct EigRange {
  double lo;
  double hi;
};

EigRange eig_range(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return {m(0, 0), m(0, 0)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

void accumulate(SparseEigenReport& rep, const Eigen::MatrixXd& m,
                const std::vector<int>& b, const std::vector<int>& extra) {
  std::vector<int> a = b;
  a.insert(a.end(), extra.begin(), extra.end());
  const EigRange r = eig_range(submatrix(m, a));
  rep.phi_min = std::min(rep.phi_min, r.lo);
  rep.phi_max = std::max(rep.phi_max, r.hi);
  if (r.lo > 0.0) rep.phi_cond = std::max(rep.phi_cond, r.hi / r.lo);
}

// visits all size-m subsets of `pool`
template <class Fn>
void for_each_combination(const std::vector<int>& pool, int m, Fn fn) {
  if (m == 0) {
    std::vector<int> empty;
    fn(empty);
    return;
  }
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  const int n = static_cast<int>(pool.size());
  std::vector<int> combo(m);
  while (true) {
    for (int i = 0; i < m; ++i) combo[i] = pool[idx[i]];
    fn(combo);
    int i = m - 1;
    while (i >= 0 && idx[i] == n - m + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

SparseEigenReport sparse_eigen(const Eigen::MatrixXd& m_mat, int m,
                               const std::vector<int>& b, SparseEigenMode mode,
                               int trials, std::uint64_t seed) {
  const int p = static_cast<int>(m_mat.rows());
  if (m_mat.cols() != p) {
    throw std::invalid_argument("sparse_eigen: matrix must be square");
  }
  std::set<int> bset(b.begin(), b.end());
  for (int j : b) {
    if (j < 0 || j >= p) {
      throw std::invalid_argument("sparse_eigen: B index out of range");
    }
  }
  std::vector<int> bsorted(bset.begin(), bset.end());
  std::vector<int> pool;
  for (int j = 0; j < p; ++j) {
    if (!bset.count(j)) pool.push_back(j);
  }
  if (m < 0 || m > static_cast<int>(pool.size())) {
    throw std::invalid_argument("sparse_eigen: m out of range");
  }
  if (m == 0 && bsorted.empty()) {
    throw std::invalid_argument("sparse_eigen: empty family (m=0, B empty)");
  }

  SparseEigenReport rep;
  rep.m = m;
  rep.b_set = bsorted;
  rep.phi_min = kInf;
  rep.phi_max = -kInf;
  rep.phi_cond = 1.0;

  if (mode == SparseEigenMode::Exact) {
    const double log_count =
        stats::log_binomial(static_cast<int>(pool.size()), m);
    if (log_count > std::log(1e6)) {
      throw std::invalid_argument(
          "sparse_eigen: exact enumeration exceeds 1e6 subsets; use sampled "
          "mode");
    }
    for_each_combination(pool, m, [&](const std::vector<int>& extra) {
      accumulate(rep, m_mat, bsorted, extra);
    });
    // the ratio family is |A\B| <= max(1, m); for m = 0 scan singletons too
    if (m == 0 && !pool.empty()) {
      SparseEigenReport aux = rep;
      for (int j : pool) {
        accumulate(aux, m_mat, bsorted, {j});
      }
      rep.phi_cond = aux.phi_cond;
    }
    rep.exact = true;
    return rep;
  }

  // sampled mode: random subsets plus adversarial subsets picked from the
  // extreme eigenvectors of the full matrix
  Rng rng(seed);
  std::vector<int> scratch = pool;
  for (int t = 0; t < trials; ++t) {
    // partial Fisher-Yates for a uniform m-subset
    for (int i = 0; i < m; ++i) {
      const auto j =
          i + static_cast<int>(rng.below(scratch.size() - i));
      std::swap(scratch[i], scratch[j]);
    }
    accumulate(rep, m_mat, bsorted,
               std::vector<int>(scratch.begin(), scratch.begin() + m));
  }
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_mat);
    for (const Eigen::Index which : {Eigen::Index{0}, Eigen::Index{p - 1}}) {
      const Eigen::VectorXd v = es.eigenvectors().col(which);
      std::vector<int> ranked = pool;
      std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        return std::fabs(v(a)) > std::fabs(v(b));
      });
      accumulate(rep, m_mat, bsorted,
                 std::vector<int>(ranked.begin(), ranked.begin() + m));
    }
  }
  rep.exact = false;
  return rep;
}

void AssumptionParams::validate() const {
  if (m < 0 || k < 0) {
    throw std::invalid_argument("assumption params: m, k must be >= 0");
  }
  if (!(eta2 > 0 && eta2 < 1 && eta3 > 0 && eta3 < 1)) {
    throw std::invalid_argument("assumption params: eta2, eta3 must be in (0,1)");
  }
  if (!(eps1 + eps2 < 1)) {
    throw std::invalid_argument("assumption params: need eps1 + eps2 < 1");
  }
}

nlohmann::json AssumptionParams::to_json() const {
  return {{"m", m},       {"k", k},       {"rho_star", rho_star},
          {"eta2", eta2}, {"eta3", eta3}, {"eps1", eps1},
          {"eps2", eps2}, {"eps3", eps3}, {"eps4", eps4}};
}

AssumptionParams AssumptionParams::from_json(const nlohmann::json& j) {
  AssumptionParams p;
  p.m = j.at("m").get<int>();
  p.k = j.at("k").get<int>();
  p.rho_star = j.at("rho_star").get<double>();
  p.eta2 = j.at("eta2").get<double>();
  p.eta3 = j.at("eta3").get<double>();
  p.eps1 = j.at("eps1").get<double>();
  p.eps2 = j.at("eps2").get<double>();
  p.eps3 = j.at("eps3").get<double>();
  p.eps4 = j.at("eps4").get<double>();
  return p;
}

namespace {
nlohmann::json clauses_to_json(const std::vector<Clause>& clauses) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : clauses) {
    arr.push_back({{"name", c.name},
                   {"lhs", c.lhs},
                   {"rhs", c.rhs},
                   {"pass", c.pass},
                   {"slack", c.slack}});
  }
  return arr;
}

Clause make_clause(std::string name, double lhs, double rhs,
                   bool strict = false) {
  Clause c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.pass = strict ? lhs < rhs : lhs <= rhs;
  c.slack = rhs - lhs;
  return c;
}
}  // namespace

nlohmann::json AssumptionReport::to_json() const {
  return {{"clauses", clauses_to_json(clauses)},
          {"lambda", lambda},
          {"lambda0", lambda0},
          {"s_star", s_star},
          {"all_pass", all_pass}};
}

AssumptionReport check_assumption_main(const CovarianceSpec& cov, int n, int p,
                                       int s0, const AssumptionParams& params,
                                       std::vector<int> support,
                                       double sigma) {
  params.validate();
  if (p != cov.dim()) {
    throw std::invalid_argument("check_assumption_main: p mismatch");
  }
  if (support.empty()) {
    for (int j = 0; j < s0; ++j) support.push_back(j);
  }
  if (static_cast<int>(support.size()) != s0) {
    throw std::invalid_argument("check_assumption_main: |support| != s0");
  }

  AssumptionReport rep;
  const int m = params.m;
  const int k = params.k;
  rep.s_star = s0 + m + k;
  rep.lambda0 = std::sqrt(2.0 / n * std::log(8.0 * p / double(k)));
  rep.lambda = (1.0 + params.eta3) / params.eta2 * sigma * rep.lambda0;

  rep.clauses.push_back(
      make_clause("diagonal_at_most_one", cov.sigma_diag_max(), 1.0 + 1e-9));

  // sparse-Riesz clause via the sparse condition number at m + k
  const Eigen::MatrixXd dense = cov.dense_sigma();
  const int outside = p - s0;
  const bool exact_ok =
      stats::log_binomial(outside, std::min(m + k, outside)) <= std::log(1e6);
  const SparseEigenReport se =
      sparse_eigen(dense, std::min(m + k, outside), support,
                   exact_ok ? SparseEigenMode::Exact : SparseEigenMode::Sampled,
                   /*trials=*/300);
  const double ratio = params.tau_upper() / params.tau_star();
  const double brace = ratio * se.phi_cond - 1.0;
  const double src_rhs =
      brace <= 0.0 ? kInf
                   : (1.0 - params.eta2) * (1.0 - params.eta2) * 2.0 * m /
                         ((1.0 + params.eta2) * (1.0 + params.eta2) * brace);
  rep.clauses.push_back(
      make_clause("sparse_riesz", double(s0 + k), src_rhs, /*strict=*/true));
  rep.clauses.push_back(
      make_clause("rho_star_le_phi_min", params.rho_star, se.phi_min));
  rep.clauses.push_back(make_clause(
      "lambda0_sqrt_s_star", rep.lambda0 * std::sqrt(double(rep.s_star)), 1.0));
  rep.clauses.push_back(make_clause("full_rank_count",
                                    double(2 * (m + k) + s0 + 1),
                                    double(std::min(n - 1, p + 1))));
  rep.clauses.push_back(make_clause("eps1_plus_eps2", params.eps1 + params.eps2,
                                    1.0, /*strict=*/true));
  {
    Clause c;
    c.name = "eps3_plus_eps4_identity";
    c.lhs = params.eps3 + params.eps4;
    c.rhs = params.eps2 * params.eps2 / 8.0;
    c.slack = c.rhs - c.lhs;
    c.pass = std::fabs(c.slack) <= 1e-12;
    rep.clauses.push_back(c);
  }
  rep.clauses.push_back(make_clause(
      "count_le_eps1_sq_n_over_2", double(rep.s_star + 1),
      std::min(double(p + 1), params.eps1 * params.eps1 * n / 2.0)));
  rep.clauses.push_back(make_clause("log_binom_le_eps3_n",
                                    stats::log_binomial(p - s0, m + k),
                                    params.eps3 * n));

  rep.all_pass = std::all_of(rep.clauses.begin(), rep.clauses.end(),
                             [](const Clause& c) { return c.pass; });
  return rep;
}

double predicted_dof_bias(const Eigen::MatrixXd& x, const std::vector<int>& s,
                          const Eigen::VectorXd& sgn_beta_s,
                          const Eigen::VectorXd& a0, double lambda, double nu,
                          int n, double fisher) {
  const auto s0 = static_cast<Eigen::Index>(s.size());
  if (sgn_beta_s.size() != s0) {
    throw std::invalid_argument("predicted_dof_bias: sign vector mismatch");
  }
  Eigen::MatrixXd xs(x.rows(), s0);
  Eigen::VectorXd a0s(s0);
  for (Eigen::Index i = 0; i < s0; ++i) {
    xs.col(i) = x.col(s[i]);
    a0s(i) = a0(s[i]);
  }
  const Eigen::MatrixXd gram = xs.transpose() * xs / double(n);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() < 1e-12) {
    throw degenerate_error("predicted_dof_bias: X_S'X_S is singular");
  }
  const Eigen::VectorXd v = ldlt.solve(sgn_beta_s);
  return std::sqrt(fisher / double(n)) * (double(s.size()) - nu) * lambda *
         a0s.dot(v);
}

nlohmann::json SignConsistencyReport::to_json() const {
  return {{"clauses", clauses_to_json(clauses)}, {"lambda", lambda},
          {"rho", rho},                          {"c_min", c_min},
          {"c_beta", c_beta},                    {"all_pass", all_pass}};
}

SignConsistencyReport check_sign_consistency(
    const CovarianceSpec& cov, const std::vector<int>& s,
    const Eigen::VectorXd& sgn_beta_s, double min_abs_beta, int n, int p,
    double gamma, double delta, double phi_p, double sigma) {
  if (!(gamma > 0 && gamma < 1)) {
    throw std::invalid_argument("check_sign_consistency: gamma in (0,1)");
  }
  if (phi_p < 2) {
    throw std::invalid_argument("check_sign_consistency: phi_p >= 2");
  }
  const auto s0 = static_cast<Eigen::Index>(s.size());
  if (sgn_beta_s.size() != s0 || s0 == 0) {
    throw std::invalid_argument("check_sign_consistency: bad support");
  }

  const Eigen::MatrixXd dense = cov.dense_sigma();
  std::vector<int> sc;
  std::set<int> sset(s.begin(), s.end());
  for (int j = 0; j < p; ++j) {
    if (!sset.count(j)) sc.push_back(j);
  }

  Eigen::MatrixXd sig_ss = submatrix(dense, s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sig_ss);
  if (es.eigenvalues().minCoeff() <= 0) {
    throw std::invalid_argument("check_sign_consistency: Sigma_SS singular");
  }
  const Eigen::VectorXd ss_inv_sgn = es.operatorInverseSqrt() *
                                     es.operatorInverseSqrt() * sgn_beta_s;
  const Eigen::MatrixXd inv_sqrt = es.operatorInverseSqrt();

  SignConsistencyReport rep;
  rep.c_beta = (inv_sqrt * sgn_beta_s).norm() / std::sqrt(double(s0));
  rep.c_min = 1.0 / std::sqrt(es.eigenvalues().maxCoeff());

  // irrepresentability over the off-support rows
  double irrep = 0.0;
  rep.rho = 0.0;
  for (int j : sc) {
    Eigen::VectorXd sig_js(s0);
    for (Eigen::Index i = 0; i < s0; ++i) sig_js(i) = dense(j, s[i]);
    irrep = std::max(irrep, std::fabs(sig_js.dot(ss_inv_sgn)));
    const Eigen::VectorXd w = inv_sqrt * sig_js;
    rep.rho = std::max(rep.rho, dense(j, j) - w.squaredNorm());
  }
  rep.clauses.push_back(make_clause("irrepresentability", irrep, 1.0 - gamma));

  rep.lambda =
      sigma / gamma * std::sqrt(phi_p * rep.rho * 2.0 / n * std::log(double(p)));

  const double log_psc = std::log(std::max(1.0, double(p - s0)));
  const double sample_lhs =
      rep.rho / (rep.c_min * gamma * gamma) * (2.0 * s0 / n) * log_psc +
      log_psc / (phi_p * std::log(double(p)));
  rep.clauses.push_back(
      make_clause("sample_size", sample_lhs, 1.0 - delta, /*strict=*/true));

  // minimum-signal condition; the growing constant is taken as sqrt(log n)
  const double cn = std::sqrt(std::log(double(n)));
  const double inf_norm = inv_sqrt.cwiseAbs().rowwise().sum().maxCoeff();
  const double min_rhs =
      (1.0 + cn / std::sqrt(double(n))) * rep.lambda * inf_norm * inf_norm +
      20.0 * std::sqrt(sigma * sigma / (rep.c_min * n) *
                       std::log(double(std::max<Eigen::Index>(2, s0))));
  rep.clauses.push_back(make_clause("min_signal", min_rhs, min_abs_beta));

  rep.all_pass = std::all_of(rep.clauses.begin(), rep.clauses.end(),
                             [](const Clause& c) { return c.pass; });
  return rep;
}

LinfBoundReport linf_bound(const CovarianceSpec& cov, double lambda,
                           double lambda0, int n, int p, int s_star, double m5,
                           double m_bar, double sigma) {
  if (s_star >= n) {
    throw std::invalid_argument("linf_bound: need s_star < n");
  }
  if (m5 <= 0 || m_bar <= 0) {
    throw std::invalid_argument("linf_bound: constants must be positive");
  }
  LinfBoundReport rep;
  rep.per_coordinate.resize(p);
  const double denom = 1.0 - double(s_star) / n;
  const double tail = std::sqrt(std::log(double(p)) / n) *
                      (2.0 * m5 + 3.0 * m_bar * lambda0 *
                                      std::sqrt(double(s_star)));
  rep.rho_sigma = 0.0;
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(p);
    ej(j) = 1.0;
    const double col_l1 = cov.inv_times(ej).lpNorm<1>();
    const double col_l2 = std::sqrt(cov.inv_diag(j));
    rep.per_coordinate(j) =
        (m5 * m5 * col_l1 * lambda + sigma * col_l2 * tail) / denom;
    rep.rho_sigma = std::max(rep.rho_sigma, col_l1);
  }
  rep.global = rep.rho_sigma *
               ((m5 * m5 + 2.0 * m5 +
                 4.0 * m_bar * lambda0 * std::sqrt(double(s_star))) /
                denom) *
               std::max(lambda, sigma * std::sqrt(std::log(double(p)) / n));
  return rep;
}

RatesReport rates(double s0, double s_omega, double rho, double n, double p,
                  double c0_u0_l1) {
  if (s0 <= 0 || s_omega <= 0 || n <= 0 || p <= 1) {
    throw std::invalid_argument("rates: arguments must be positive (p > 1)");
  }
  RatesReport rep;
  const double logp = std::log(p);
  const double sparse_branch = std::min(s0, s_omega) * logp / std::sqrt(n);
  rep.r_lower = std::min(sparse_branch, std::max(rho, 1.02) * std::sqrt(logp));
  rep.r_upper = sparse_branch;
  rep.k_condition = c0_u0_l1;
  if (std::isfinite(c0_u0_l1)) {
    rep.r_upper = std::min(rep.r_upper, c0_u0_l1 * std::sqrt(logp));
  }
  return rep;
}

SteinReport stein_dof_check(const std::vector<SteinRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("stein_dof_check: no records");
  }
  SteinReport rep;
  for (const auto& r : records) {
    rep.mean_inner += r.inner;
    rep.mean_shat += r.shat;
  }
  rep.mean_inner /= double(records.size());
  rep.mean_shat /= double(records.size());
  rep.ratio = rep.mean_shat == 0.0
                  ? std::numeric_limits<double>::quiet_NaN()
                  : rep.mean_inner / rep.mean_shat;
  return rep;
}

double stein_inner(const Eigen::MatrixXd& x, const Eigen::VectorXd& eps,
                   const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta,
                   double sigma) {
  if (sigma <= 0) throw std::invalid_argument("stein_inner: sigma must be > 0");
  return eps.dot(x * (beta_hat - beta)) / (sigma * sigma);
}

}  // namespace dlasso
