#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "dlasso/lasso.hpp"
#include "dlasso/score.hpp"

namespace dlasso {

enum class Variant { LdpeDf, PluginJm, Zz, EstimatedScore };
enum class ScoreKind { Ideal, Estimated };

std::string variant_tag(Variant v);

// Degrees-of-freedom adjustment rule: nu = 0, nu = |supp(beta_hat)|, or a
// fixed value.
struct NuRule {
  enum class Kind { Zero, Shat, Fixed };
  Kind kind = Kind::Zero;
  int fixed_value = 0;

  static NuRule zero() { return {Kind::Zero, 0}; }
  static NuRule shat() { return {Kind::Shat, 0}; }
  static NuRule fixed(int k) { return {Kind::Fixed, k}; }

  int resolve(const LassoFit& fit) const {
    switch (kind) {
      case Kind::Zero:
        return 0;
      case Kind::Shat:
        return fit.shat();
      case Kind::Fixed:
        return fixed_value;
    }
    return 0;
  }
  std::string tag() const;
};

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.05;
};

struct DebiasedEstimate {
  double theta_hat = 0.0;
  Variant variant = Variant::LdpeDf;
  int nu = 0;
  int n = 0;
  ScoreKind score_kind = ScoreKind::Ideal;
  double base = 0.0;  // <a0, beta_hat> before the correction
  double se = 0.0;
  std::optional<double> pivot;  // filled when the truth is known
  std::optional<ConfidenceInterval> ci;
};

// theta_nu = <a0, beta_hat> + <z0, y - X beta_hat> / (||z0||^2 (1 - nu/n))
DebiasedEstimate debias_known_sigma(const LassoFit& fit,
                                    const IdealScore& score,
                                    const Eigen::VectorXd& y,
                                    const Eigen::MatrixXd& x, NuRule rule);

struct PluginResult {
  Eigen::VectorXd beta_debiased;  // beta_hat + Sigma^{-1} X' r / (n - nu)
  DebiasedEstimate estimate;      // <a0, beta_debiased>
};

PluginResult debias_plugin(const LassoFit& fit, const CovarianceSpec& cov,
                           const TargetFunctional& target,
                           const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                           int nu);

// theta_nu = <a0, beta_hat> + <z0, y - X beta_hat> / (<z0, Xu> (1 - nu/n))
// for any u with <u, a0> = 1.
DebiasedEstimate debias_zz(const LassoFit& fit, const IdealScore& score,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& x, int nu);

// theta_nu = <a0, beta_hat> + <z_hat, y - X beta_hat> / ((1 - nu/n) <z_hat, z>)
DebiasedEstimate debias_estimated_score(const LassoFit& fit,
                                        const EstimatedScore& score,
                                        const Eigen::VectorXd& y,
                                        const Eigen::MatrixXd& x, NuRule rule);

// sqrt(n * fisher) * (1 - nu/n) * (theta_hat - theta)
double pivot_value(const DebiasedEstimate& estimate, double theta_true,
                   double fisher, int n);

// Two-sided interval from the ideal-score pivot: the reference distribution
// is t with n degrees of freedom and se = sigma c0 / (sqrt(n) (1 - nu/n)).
ConfidenceInterval confidence_interval(DebiasedEstimate& estimate, int n,
                                       const IdealScore& score, double alpha);

// Estimated-score interval: normal reference and
// se = sigma_hat ||z_hat|| / (|<z_hat, z>| (1 - nu/n)).
ConfidenceInterval confidence_interval(DebiasedEstimate& estimate, int n,
                                       const EstimatedScore& score,
                                       double sigma_hat, double alpha);

}  // namespace dlasso
