#include "dlasso/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace dlasso {

namespace {
constexpr double kSpdFloor = 1e-10;
}

CovarianceSpec CovarianceSpec::identity(int p) {
  if (p < 1) throw std::invalid_argument("covariance: p must be positive");
  CovarianceSpec c;
  c.kind_ = CovKind::Identity;
  c.p_ = p;
  return c;
}

CovarianceSpec CovarianceSpec::rank_one_perturbed_inverse(
    int p, int j, double c, const Eigen::VectorXd& s) {
  if (p < 1) throw std::invalid_argument("covariance: p must be positive");
  if (j < 0 || j >= p) {
    throw std::invalid_argument("covariance: index j out of range");
  }
  if (s.size() != p) {
    throw std::invalid_argument("covariance: sign vector has wrong length");
  }
  CovarianceSpec out;
  out.kind_ = CovKind::RankOnePerturbedInverse;
  out.p_ = p;
  out.j_ = j;
  out.c_ = c;
  out.s_ = s;
  out.build_modes();
  return out;
}

void CovarianceSpec::build_modes() {
  modes_.clear();
  const double alpha = s_(j_);
  Eigen::VectorXd t = s_;
  t(j_) = 0.0;
  const double bn = t.norm();
  if (c_ == 0.0 || (bn == 0.0 && alpha == 0.0)) return;  // no perturbation

  if (bn == 0.0) {
    // s is a multiple of e_j: single mode 2*c*alpha on e_j
    Eigen::VectorXd u = Eigen::VectorXd::Zero(p_);
    u(j_) = 1.0;
    modes_.emplace_back(2.0 * c_ * alpha, std::move(u));
  } else {
    // Perturbation lives in span{e_j, t/||t||}; its 2x2 restriction is
    // c*[[2a, b], [b, 0]] with eigenvalues c*a +- |c|*||s||.
    const Eigen::VectorXd q2 = t / bn;
    const double snorm = std::hypot(alpha, bn);
    for (int sign : {+1, -1}) {
      const double mu = c_ * alpha + sign * std::fabs(c_) * snorm;
      Eigen::VectorXd w = mu * Eigen::VectorXd::Unit(p_, j_) + (c_ * bn) * q2;
      const double wn = w.norm();
      if (wn == 0.0) continue;
      modes_.emplace_back(mu, w / wn);
    }
  }
  for (const auto& [mu, u] : modes_) {
    if (1.0 + mu < kSpdFloor) {
      throw std::invalid_argument(
          "covariance: rank-one-perturbed inverse is not positive definite");
    }
  }
}

CovarianceSpec CovarianceSpec::explicit_matrix(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    throw std::invalid_argument("covariance: matrix must be square");
  }
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("covariance: matrix must be symmetric");
  }
  CovarianceSpec out;
  out.kind_ = CovKind::Explicit;
  out.p_ = static_cast<int>(sigma.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("covariance: eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() < kSpdFloor) {
    throw std::invalid_argument(
        "covariance: matrix is not positive definite (eigenvalue < 1e-10)");
  }
  out.eigvecs_ = es.eigenvectors();
  out.eigvals_ = es.eigenvalues();
  return out;
}

namespace {
// Applies g to the eigenvalues 1+mu_i of Sigma^{-1} on the stored modes.
template <class F>
Eigen::VectorXd apply_modes(
    const std::vector<std::pair<double, Eigen::VectorXd>>& modes,
    const Eigen::VectorXd& v, F g) {
  Eigen::VectorXd out = v;
  for (const auto& [mu, u] : modes) {
    out += (g(1.0 + mu) - 1.0) * u * u.dot(v);
  }
  return out;
}
}  // namespace

Eigen::VectorXd CovarianceSpec::inv_times(const Eigen::VectorXd& v) const {
  switch (kind_) {
    case CovKind::Identity:
      return v;
    case CovKind::RankOnePerturbedInverse:
      return apply_modes(modes_, v, [](double e) { return e; });
    case CovKind::Explicit:
      return eigvecs_ *
             (eigvals_.array().inverse() *
              (eigvecs_.transpose() * v).array())
                 .matrix();
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd CovarianceSpec::sigma_times(const Eigen::VectorXd& v) const {
  switch (kind_) {
    case CovKind::Identity:
      return v;
    case CovKind::RankOnePerturbedInverse:
      return apply_modes(modes_, v, [](double e) { return 1.0 / e; });
    case CovKind::Explicit:
      return eigvecs_ *
             (eigvals_.array() * (eigvecs_.transpose() * v).array()).matrix();
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd CovarianceSpec::sqrt_times(const Eigen::VectorXd& v) const {
  switch (kind_) {
    case CovKind::Identity:
      return v;
    case CovKind::RankOnePerturbedInverse:
      return apply_modes(modes_, v,
                         [](double e) { return 1.0 / std::sqrt(e); });
    case CovKind::Explicit:
      return eigvecs_ *
             (eigvals_.array().sqrt() * (eigvecs_.transpose() * v).array())
                 .matrix();
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd CovarianceSpec::inv_sqrt_times(const Eigen::VectorXd& v) const {
  switch (kind_) {
    case CovKind::Identity:
      return v;
    case CovKind::RankOnePerturbedInverse:
      return apply_modes(modes_, v, [](double e) { return std::sqrt(e); });
    case CovKind::Explicit:
      return eigvecs_ * (eigvals_.array().rsqrt() *
                         (eigvecs_.transpose() * v).array())
                            .matrix();
  }
  throw std::logic_error("unreachable");
}

double CovarianceSpec::quad_inv(const Eigen::VectorXd& a) const {
  return a.dot(inv_times(a));
}

double CovarianceSpec::inv_diag(int j) const {
  if (j < 0 || j >= p_) throw std::invalid_argument("inv_diag: j out of range");
  switch (kind_) {
    case CovKind::Identity:
      return 1.0;
    case CovKind::RankOnePerturbedInverse: {
      double d = 1.0;
      for (const auto& [mu, u] : modes_) d += mu * u(j) * u(j);
      return d;
    }
    case CovKind::Explicit: {
      double d = 0.0;
      for (int k = 0; k < p_; ++k) {
        d += eigvecs_(j, k) * eigvecs_(j, k) / eigvals_(k);
      }
      return d;
    }
  }
  throw std::logic_error("unreachable");
}

double CovarianceSpec::sigma_diag_max() const {
  switch (kind_) {
    case CovKind::Identity:
      return 1.0;
    case CovKind::RankOnePerturbedInverse: {
      Eigen::VectorXd diag = Eigen::VectorXd::Ones(p_);
      for (const auto& [mu, u] : modes_) {
        diag += (1.0 / (1.0 + mu) - 1.0) * u.cwiseProduct(u);
      }
      return diag.maxCoeff();
    }
    case CovKind::Explicit: {
      double best = -1.0;
      for (int j = 0; j < p_; ++j) {
        double d = 0.0;
        for (int k = 0; k < p_; ++k) {
          d += eigvecs_(j, k) * eigvecs_(j, k) * eigvals_(k);
        }
        best = std::max(best, d);
      }
      return best;
    }
  }
  throw std::logic_error("unreachable");
}

double CovarianceSpec::min_eigenvalue() const {
  switch (kind_) {
    case CovKind::Identity:
      return 1.0;
    case CovKind::RankOnePerturbedInverse: {
      double m = 1.0;
      for (const auto& [mu, u] : modes_) m = std::min(m, 1.0 / (1.0 + mu));
      return m;
    }
    case CovKind::Explicit:
      return eigvals_.minCoeff();
  }
  throw std::logic_error("unreachable");
}

Eigen::MatrixXd CovarianceSpec::dense_sigma() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(p_, p_);
  switch (kind_) {
    case CovKind::Identity:
      return out;
    case CovKind::RankOnePerturbedInverse:
      for (const auto& [mu, u] : modes_) {
        out += (1.0 / (1.0 + mu) - 1.0) * u * u.transpose();
      }
      return out;
    case CovKind::Explicit:
      return eigvecs_ * eigvals_.asDiagonal() * eigvecs_.transpose();
  }
  throw std::logic_error("unreachable");
}

Eigen::MatrixXd CovarianceSpec::dense_inv() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(p_, p_);
  switch (kind_) {
    case CovKind::Identity:
      return out;
    case CovKind::RankOnePerturbedInverse:
      for (const auto& [mu, u] : modes_) out += mu * u * u.transpose();
      return out;
    case CovKind::Explicit:
      return eigvecs_ * eigvals_.cwiseInverse().asDiagonal() *
             eigvecs_.transpose();
  }
  throw std::logic_error("unreachable");
}

nlohmann::json CovarianceSpec::to_json() const {
  nlohmann::json j;
  j["p"] = p_;
  switch (kind_) {
    case CovKind::Identity:
      j["kind"] = "identity";
      break;
    case CovKind::RankOnePerturbedInverse: {
      j["kind"] = "rank1inv";
      j["j"] = j_ + 1;  // 1-based on the wire
      j["c"] = c_;
      j["s"] = std::vector<double>(s_.data(), s_.data() + s_.size());
      break;
    }
    case CovKind::Explicit: {
      j["kind"] = "explicit";
      const Eigen::MatrixXd m = dense_sigma();
      std::vector<std::vector<double>> rows(p_);
      for (int r = 0; r < p_; ++r) {
        rows[r].assign(m.row(r).begin(), m.row(r).end());
      }
      j["matrix"] = rows;
      break;
    }
  }
  return j;
}

CovarianceSpec CovarianceSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") {
    return identity(j.at("p").get<int>());
  }
  if (kind == "rank1inv") {
    const int p = j.at("p").get<int>();
    const auto sv = j.at("s").get<std::vector<double>>();
    Eigen::VectorXd s =
        Eigen::Map<const Eigen::VectorXd>(sv.data(), sv.size());
    return rank_one_perturbed_inverse(p, j.at("j").get<int>() - 1,
                                      j.at("c").get<double>(), s);
  }
  if (kind == "explicit") {
    const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    const int p = static_cast<int>(rows.size());
    Eigen::MatrixXd m(p, p);
    for (int r = 0; r < p; ++r) {
      if (static_cast<int>(rows[r].size()) != p) {
        throw std::invalid_argument("covariance: matrix is not square");
      }
      for (int cix = 0; cix < p; ++cix) m(r, cix) = rows[r][cix];
    }
    return explicit_matrix(m);
  }
  throw std::invalid_argument("covariance: unknown kind '" + kind + "'");
}

}  // namespace dlasso
