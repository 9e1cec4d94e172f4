#include "dlasso/debias.hpp"

#include <cmath>
#include <stdexcept>

#include "dlasso/stats.hpp"

namespace dlasso {

std::string variant_tag(Variant v) {
  switch (v) {
    case Variant::LdpeDf:
      return "ldpe_df";
    case Variant::PluginJm:
      return "plugin_jm";
    case Variant::Zz:
      return "zz";
    case Variant::EstimatedScore:
      return "est_score";
  }
  return "?";
}

std::string NuRule::tag() const {
  switch (kind) {
    case Kind::Zero:
      return "nu0";
    case Kind::Shat:
      return "shat";
    case Kind::Fixed:
      return "nu" + std::to_string(fixed_value);
  }
  return "?";
}

namespace {
void check_nu(int nu, int n) {
  if (nu < 0 || nu >= n) {
    throw std::invalid_argument("debias: need 0 <= nu < n");
  }
}
}  // namespace

DebiasedEstimate debias_known_sigma(const LassoFit& fit,
                                    const IdealScore& score,
                                    const Eigen::VectorXd& y,
                                    const Eigen::MatrixXd& x, NuRule rule) {
  const int n = static_cast<int>(x.rows());
  const int nu = rule.resolve(fit);
  check_nu(nu, n);
  const double znorm2 = score.z0.squaredNorm();
  if (!(znorm2 > 0.0)) {
    throw degenerate_error("debias_known_sigma: score vector is zero");
  }
  const Eigen::VectorXd r = y - x * fit.beta;
  DebiasedEstimate e;
  e.variant = Variant::LdpeDf;
  e.score_kind = ScoreKind::Ideal;
  e.nu = nu;
  e.n = n;
  e.base = score.a0.dot(fit.beta);
  e.theta_hat = e.base + score.z0.dot(r) / (znorm2 * (1.0 - double(nu) / n));
  return e;
}

PluginResult debias_plugin(const LassoFit& fit, const CovarianceSpec& cov,
                           const TargetFunctional& target,
                           const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                           int nu) {
  const int n = static_cast<int>(x.rows());
  check_nu(nu, n);
  const Eigen::VectorXd r = y - x * fit.beta;
  PluginResult out;
  out.beta_debiased =
      fit.beta + cov.inv_times(x.transpose() * r) / (double(n) - nu);
  out.estimate.variant = Variant::PluginJm;
  out.estimate.score_kind = ScoreKind::Ideal;
  out.estimate.nu = nu;
  out.estimate.n = n;
  out.estimate.base = target.a0.dot(fit.beta);
  out.estimate.theta_hat = target.a0.dot(out.beta_debiased);
  return out;
}

DebiasedEstimate debias_zz(const LassoFit& fit, const IdealScore& score,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& x, int nu) {
  const int n = static_cast<int>(x.rows());
  check_nu(nu, n);
  if (std::fabs(u.dot(score.a0) - 1.0) > 1e-10) {
    throw std::invalid_argument("debias_zz: <u, a0> must equal 1");
  }
  const double denom = score.z0.dot(x * u);
  if (std::fabs(denom) < 1e-10 * n) {
    throw degenerate_error("debias_zz: <z0, Xu> is numerically zero");
  }
  const Eigen::VectorXd r = y - x * fit.beta;
  DebiasedEstimate e;
  e.variant = Variant::Zz;
  e.score_kind = ScoreKind::Ideal;
  e.nu = nu;
  e.n = n;
  e.base = score.a0.dot(fit.beta);
  e.theta_hat = e.base + score.z0.dot(r) / (denom * (1.0 - double(nu) / n));
  return e;
}

DebiasedEstimate debias_estimated_score(const LassoFit& fit,
                                        const EstimatedScore& score,
                                        const Eigen::VectorXd& y,
                                        const Eigen::MatrixXd& x,
                                        NuRule rule) {
  const int n = static_cast<int>(x.rows());
  const int nu = rule.resolve(fit);
  check_nu(nu, n);
  if (std::fabs(score.inner_zz) < 1e-10 * n) {
    throw degenerate_error(
        "debias_estimated_score: <z_hat, z> is numerically zero");
  }
  const Eigen::VectorXd r = y - x * fit.beta;
  DebiasedEstimate e;
  e.variant = Variant::EstimatedScore;
  e.score_kind = ScoreKind::Estimated;
  e.nu = nu;
  e.n = n;
  e.base = score.a0.dot(fit.beta);
  e.theta_hat =
      e.base + score.z_hat.dot(r) / ((1.0 - double(nu) / n) * score.inner_zz);
  return e;
}

double pivot_value(const DebiasedEstimate& estimate, double theta_true,
                   double fisher, int n) {
  return std::sqrt(double(n) * fisher) * (1.0 - double(estimate.nu) / n) *
         (estimate.theta_hat - theta_true);
}

ConfidenceInterval confidence_interval(DebiasedEstimate& estimate, int n,
                                       const IdealScore& score, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("confidence_interval: alpha must be in (0,1)");
  }
  const double se = score.sigma * score.c0 /
                    (std::sqrt(double(n)) * (1.0 - double(estimate.nu) / n));
  const double q = stats::t_quantile(1.0 - alpha / 2.0, double(n));
  ConfidenceInterval ci{estimate.theta_hat - q * se,
                        estimate.theta_hat + q * se, alpha};
  estimate.se = se;
  estimate.ci = ci;
  return ci;
}

ConfidenceInterval confidence_interval(DebiasedEstimate& estimate, int n,
                                       const EstimatedScore& score,
                                       double sigma_hat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("confidence_interval: alpha must be in (0,1)");
  }
  if (sigma_hat <= 0.0) {
    throw std::invalid_argument("confidence_interval: sigma_hat must be > 0");
  }
  const double se = sigma_hat * std::sqrt(score.norm_zhat_sq) /
                    (std::fabs(score.inner_zz) * (1.0 - double(estimate.nu) / n));
  const double q = stats::normal_quantile(1.0 - alpha / 2.0);
  ConfidenceInterval ci{estimate.theta_hat - q * se,
                        estimate.theta_hat + q * se, alpha};
  estimate.se = se;
  estimate.ci = ci;
  return ci;
}

}  // namespace dlasso
