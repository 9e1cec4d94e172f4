// Python bindings for the core operations: problem generation, the solvers,
// score construction, de-biased estimates, and the diagnostics.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "dlasso/csvio.hpp"
#include "dlasso/debias.hpp"
#include "dlasso/diagnostics.hpp"
#include "dlasso/lasso.hpp"
#include "dlasso/model.hpp"
#include "dlasso/score.hpp"
#include "dlasso/simulate.hpp"
#include "dlasso/stats.hpp"

namespace py = pybind11;
using namespace dlasso;

namespace {

TargetFunctional make_target(const Eigen::VectorXd& a0) {
  TargetFunctional t;
  t.a0 = a0;
  return t;
}

NuRule parse_nu(const std::string& rule) {
  if (rule == "zero") return NuRule::zero();
  if (rule == "shat") return NuRule::shat();
  return NuRule::fixed(std::stoi(rule));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "De-biased Lasso inference with degrees-of-freedom adjustment";

  py::register_exception<degenerate_error>(m, "DegenerateError",
                                           PyExc_ArithmeticError);

  py::class_<CovarianceSpec>(m, "CovarianceSpec")
      .def_static("identity", &CovarianceSpec::identity, py::arg("p"))
      .def_static("rank_one_perturbed_inverse",
                  &CovarianceSpec::rank_one_perturbed_inverse, py::arg("p"),
                  py::arg("j"), py::arg("c"), py::arg("s"))
      .def_static("explicit_matrix", &CovarianceSpec::explicit_matrix,
                  py::arg("sigma"))
      .def_static(
          "from_json",
          [](const std::string& text) {
            return CovarianceSpec::from_json(nlohmann::json::parse(text));
          },
          py::arg("text"))
      .def_property_readonly("p", &CovarianceSpec::dim)
      .def("dense_sigma", &CovarianceSpec::dense_sigma)
      .def("dense_inv", &CovarianceSpec::dense_inv)
      .def("inv_diag", &CovarianceSpec::inv_diag, py::arg("j"))
      .def("quad_inv", &CovarianceSpec::quad_inv, py::arg("a"))
      .def("sigma_times", &CovarianceSpec::sigma_times, py::arg("v"))
      .def("inv_times", &CovarianceSpec::inv_times, py::arg("v"))
      .def("sqrt_times", &CovarianceSpec::sqrt_times, py::arg("v"))
      .def("to_json", [](const CovarianceSpec& c) { return c.to_json().dump(); });

  m.def(
      "generate_problem",
      [](const CovarianceSpec& cov, const std::vector<int>& support,
         const Eigen::VectorXd& amplitudes, bool random_signs, double sigma,
         int n, std::uint64_t seed) {
        BetaSpec spec;
        spec.support = support;
        spec.amplitudes = amplitudes;
        if (random_signs) {
          spec.sign_rule = SignRule::IidRandom;
        } else {
          spec.sign_rule = SignRule::Fixed;
          spec.signs.assign(support.size(), 1);
        }
        const auto prob = generate_problem(cov, spec, sigma, n, seed);
        return py::make_tuple(prob.x, prob.y, prob.truth->beta);
      },
      py::arg("cov"), py::arg("support"), py::arg("amplitudes"),
      py::arg("random_signs"), py::arg("sigma"), py::arg("n"), py::arg("seed"),
      "Sample (X, y, beta) with iid N(0, Sigma) rows; deterministic per seed.");

  m.def(
      "direction_sgn_beta",
      [](const Eigen::VectorXd& beta, const CovarianceSpec& cov,
         bool normalize) { return direction_sgn_beta(beta, cov, normalize).a0; },
      py::arg("beta"), py::arg("cov"), py::arg("normalize") = true);
  m.def(
      "direction_canonical",
      [](int j, const CovarianceSpec& cov, bool scaled) {
        return direction_canonical(j, cov, scaled).a0;
      },
      py::arg("j"), py::arg("cov"), py::arg("scaled") = true);

  py::class_<LassoFit>(m, "LassoFit")
      .def_readonly("beta", &LassoFit::beta)
      .def_readonly("support", &LassoFit::support)
      .def_readonly("residual", &LassoFit::residual)
      .def_readonly("n_iter", &LassoFit::n_iter)
      .def_readonly("converged", &LassoFit::converged)
      .def_readonly("kkt_violation", &LassoFit::kkt_violation)
      .def_readonly("unique_solution", &LassoFit::unique_solution)
      .def_readonly("lambda_", &LassoFit::lambda)
      .def_property_readonly("shat", &LassoFit::shat);

  m.def(
      "lasso_cd",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
         int max_iter, double tol) {
        LassoConfig cfg;
        cfg.lambda = lambda;
        cfg.max_iter = max_iter;
        cfg.tol = tol;
        return lasso_cd(x, y, cfg);
      },
      py::arg("x"), py::arg("y"), py::arg("lambda_"),
      py::arg("max_iter") = 1000, py::arg("tol") = 0.0);

  m.def("lambda_default", &lambda_default, py::arg("n"), py::arg("p"),
        py::arg("k_or_s0"), py::arg("sigma"));
  m.def("lambda_univ", &lambda_univ, py::arg("n"), py::arg("p"));

  m.def(
      "scaled_lasso",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         double lambda0_bar) {
        const auto res = scaled_lasso(x, y, lambda0_bar, {});
        return py::make_tuple(res.fit, res.tau_hat);
      },
      py::arg("x"), py::arg("y"), py::arg("lambda0_bar"));

  m.def(
      "q_constrained_lasso",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
         const Eigen::VectorXd& a0, const Eigen::VectorXd& u, double penalty) {
        const auto res = q_constrained_lasso(x, z, a0, u, penalty, {});
        return py::make_tuple(res.gamma, res.converged, res.kkt_sup);
      },
      py::arg("x"), py::arg("z"), py::arg("a0"), py::arg("u"),
      py::arg("penalty"));

  py::class_<IdealScore>(m, "IdealScore")
      .def_readonly("a0", &IdealScore::a0)
      .def_readonly("u0", &IdealScore::u0)
      .def_readonly("z0", &IdealScore::z0)
      .def_readonly("c0", &IdealScore::c0)
      .def_readonly("fisher", &IdealScore::fisher)
      .def_readonly("sigma", &IdealScore::sigma);
  m.def(
      "ideal_score",
      [](const CovarianceSpec& cov, const Eigen::VectorXd& a0,
         const Eigen::MatrixXd& x, double sigma) {
        return ideal_score(cov, make_target(a0), x, sigma);
      },
      py::arg("cov"), py::arg("a0"), py::arg("x"), py::arg("sigma"));

  py::class_<EstimatedScore>(m, "EstimatedScore")
      .def_readonly("a0", &EstimatedScore::a0)
      .def_readonly("u", &EstimatedScore::u)
      .def_readonly("gamma_hat", &EstimatedScore::gamma_hat)
      .def_readonly("z", &EstimatedScore::z)
      .def_readonly("z_hat", &EstimatedScore::z_hat)
      .def_readonly("j0", &EstimatedScore::j0)
      .def_readonly("tau_hat", &EstimatedScore::tau_hat)
      .def_readonly("inner_zz", &EstimatedScore::inner_zz)
      .def_readonly("norm_zhat_sq", &EstimatedScore::norm_zhat_sq)
      .def_readonly("penalty", &EstimatedScore::penalty)
      .def_readonly("converged", &EstimatedScore::converged);
  m.def(
      "estimated_score",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& a0, double tau_fixed,
         double col_bound) {
        EstimatedScoreConfig cfg;
        if (tau_fixed > 0) {
          cfg.tau_mode = TauMode::Fixed;
          cfg.tau_fixed = tau_fixed;
        }
        cfg.col_bound = col_bound;
        return estimated_score(x, make_target(a0), cfg);
      },
      py::arg("x"), py::arg("a0"), py::arg("tau_fixed") = 0.0,
      py::arg("col_bound") = 0.0,
      "Projected nodewise regression; tau from the scaled-Lasso recursion "
      "unless tau_fixed > 0.");

  py::class_<DebiasedEstimate>(m, "DebiasedEstimate")
      .def_readonly("theta_hat", &DebiasedEstimate::theta_hat)
      .def_readonly("nu", &DebiasedEstimate::nu)
      .def_readonly("base", &DebiasedEstimate::base)
      .def_readonly("se", &DebiasedEstimate::se)
      .def_property_readonly("ci",
                             [](const DebiasedEstimate& e) -> py::object {
                               if (!e.ci) return py::none();
                               return py::make_tuple(e.ci->lo, e.ci->hi);
                             });

  m.def(
      "debias_known_sigma",
      [](const LassoFit& fit, const IdealScore& score, const Eigen::VectorXd& y,
         const Eigen::MatrixXd& x, const std::string& nu, double alpha) {
        auto est = debias_known_sigma(fit, score, y, x, parse_nu(nu));
        confidence_interval(est, static_cast<int>(x.rows()), score, alpha);
        return est;
      },
      py::arg("fit"), py::arg("score"), py::arg("y"), py::arg("x"),
      py::arg("nu") = "shat", py::arg("alpha") = 0.05);

  m.def(
      "debias_plugin",
      [](const LassoFit& fit, const CovarianceSpec& cov,
         const Eigen::VectorXd& a0, const Eigen::VectorXd& y,
         const Eigen::MatrixXd& x, int nu) {
        const auto res = debias_plugin(fit, cov, make_target(a0), y, x, nu);
        return py::make_tuple(res.beta_debiased, res.estimate);
      },
      py::arg("fit"), py::arg("cov"), py::arg("a0"), py::arg("y"), py::arg("x"),
      py::arg("nu"));

  m.def(
      "debias_zz",
      [](const LassoFit& fit, const IdealScore& score, const Eigen::VectorXd& u,
         const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int nu) {
        return debias_zz(fit, score, u, y, x, nu);
      },
      py::arg("fit"), py::arg("score"), py::arg("u"), py::arg("y"),
      py::arg("x"), py::arg("nu"));

  m.def(
      "debias_estimated_score",
      [](const LassoFit& fit, const EstimatedScore& score,
         const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
         const std::string& nu, double sigma_hat, double alpha) {
        auto est = debias_estimated_score(fit, score, y, x, parse_nu(nu));
        if (sigma_hat > 0) {
          confidence_interval(est, static_cast<int>(x.rows()), score,
                              sigma_hat, alpha);
        }
        return est;
      },
      py::arg("fit"), py::arg("score"), py::arg("y"), py::arg("x"),
      py::arg("nu") = "shat", py::arg("sigma_hat") = 0.0,
      py::arg("alpha") = 0.05);

  m.def("pivot_value", &pivot_value, py::arg("estimate"),
        py::arg("theta_true"), py::arg("fisher"), py::arg("n"));

  // diagnostics
  m.def(
      "sparse_eigen",
      [](const Eigen::MatrixXd& mat, int m_size, const std::vector<int>& b,
         bool exact, int trials, std::uint64_t seed) {
        const auto rep = sparse_eigen(
            mat, m_size, b,
            exact ? SparseEigenMode::Exact : SparseEigenMode::Sampled, trials,
            seed);
        return py::make_tuple(rep.phi_min, rep.phi_max, rep.phi_cond,
                              rep.exact);
      },
      py::arg("m"), py::arg("m_size"), py::arg("b") = std::vector<int>{},
      py::arg("exact") = true, py::arg("trials") = 1000, py::arg("seed") = 1);

  m.def(
      "predicted_dof_bias",
      [](const Eigen::MatrixXd& x, const std::vector<int>& s,
         const Eigen::VectorXd& sgn_beta_s, const Eigen::VectorXd& a0,
         double lambda, double nu, int n, double fisher) {
        return predicted_dof_bias(x, s, sgn_beta_s, a0, lambda, nu, n, fisher);
      },
      py::arg("x"), py::arg("s"), py::arg("sgn_beta_s"), py::arg("a0"),
      py::arg("lambda_"), py::arg("nu"), py::arg("n"), py::arg("fisher"));

  m.def(
      "rates",
      [](double s0, double s_omega, double rho, double n, double p,
         double c0_u0_l1) {
        const auto r = rates(s0, s_omega, rho, n, p, c0_u0_l1);
        return py::make_tuple(r.r_lower, r.r_upper, r.k_condition);
      },
      py::arg("s0"), py::arg("s_omega"), py::arg("rho"), py::arg("n"),
      py::arg("p"), py::arg("c0_u0_l1") = std::nan(""));

  m.def(
      "check_assumption_main",
      [](const CovarianceSpec& cov, int n, int p, int s0,
         const std::string& params_json) {
        const auto params = AssumptionParams::from_json(
            nlohmann::json::parse(params_json));
        return check_assumption_main(cov, n, p, s0, params).to_json().dump();
      },
      py::arg("cov"), py::arg("n"), py::arg("p"), py::arg("s0"),
      py::arg("params_json"));

  m.def(
      "linf_bound",
      [](const CovarianceSpec& cov, double lambda, double lambda0, int n,
         int p, int s_star, double m5, double m_bar, double sigma) {
        const auto rep =
            linf_bound(cov, lambda, lambda0, n, p, s_star, m5, m_bar, sigma);
        return py::make_tuple(rep.per_coordinate, rep.global, rep.rho_sigma);
      },
      py::arg("cov"), py::arg("lambda_"), py::arg("lambda0"), py::arg("n"),
      py::arg("p"), py::arg("s_star"), py::arg("m5"), py::arg("m_bar") = 1.0,
      py::arg("sigma") = 1.0);

  // simulation harness
  m.def(
      "fig1_config",
      [](int s0_full, double scale) {
        return fig1_config(s0_full, scale).to_json().dump();
      },
      py::arg("s0_full"), py::arg("scale") = 1.0);
  m.def(
      "fig2_config",
      [](double scale) { return fig2_config(scale).to_json().dump(); },
      py::arg("scale") = 1.0);
  m.def(
      "run_experiment",
      [](const std::string& config_json, int threads) {
        const auto cfg =
            ExperimentConfig::from_json(nlohmann::json::parse(config_json));
        const auto recs = run_experiment(cfg, threads);
        std::ostringstream csv;
        write_records_csv(csv, cfg, recs);
        return py::make_tuple(csv.str(),
                              summarize_records(cfg, recs).dump());
      },
      py::arg("config_json"), py::arg("threads") = 1,
      "Returns (records_csv, summary_json).");

  m.def("t_quantile", &stats::t_quantile, py::arg("p"), py::arg("df"));
  m.def("t_cdf", &stats::t_cdf, py::arg("x"), py::arg("df"));
  m.def("normal_quantile", &stats::normal_quantile, py::arg("p"));
}
