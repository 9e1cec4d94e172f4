// Command-line front end: simulation presets, inference on user data, and
// the structural-condition checkers.
//
// Exit codes: 0 ok, 2 usage/config error, 3 numerical degeneracy.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dlasso/csvio.hpp"
#include "dlasso/diagnostics.hpp"
#include "dlasso/model.hpp"
#include "dlasso/simulate.hpp"
#include "dlasso/stats.hpp"
#include "dlasso/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("DEBIAS_LASSO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::set<std::string> parse_formats(const std::string& formats) {
  std::set<std::string> out;
  std::stringstream ss(formats);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item != "csv" && item != "json" && item != "svg") {
      throw std::invalid_argument("unknown format '" + item + "'");
    }
    out.insert(item);
  }
  if (out.empty()) throw std::invalid_argument("no output format selected");
  return out;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return json::parse(in);  // parse errors carry the byte offset
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path.string() + "'");
  out << content;
}

int run_simulation(const dlasso::ExperimentConfig& config,
                   const std::string& out_dir,
                   const std::set<std::string>& formats, int threads) {
  fs::create_directories(out_dir);
  const auto records = dlasso::run_experiment(config, resolve_threads(threads));

  if (formats.count("csv")) {
    std::ostringstream csv;
    dlasso::write_records_csv(csv, config, records);
    write_text(fs::path(out_dir) / "records.csv", csv.str());
    write_text(fs::path(out_dir) / "config.json",
               config.to_json().dump(2) + "\n");
  }
  if (formats.count("json")) {
    write_text(fs::path(out_dir) / "summary.json",
               dlasso::summarize_records(config, records).dump(2) + "\n");
  }
  if (formats.count("svg")) {
    // one histogram per (variant, nu) with bins shared across nu variants,
    // plus a grouped boxplot
    std::vector<double> pooled;
    std::size_t idx = 0;
    std::vector<std::pair<std::string, std::vector<double>>> cells;
    for (auto v : config.variants) {
      for (const auto& rule : config.nu_rules) {
        std::vector<double> pivots;
        for (const auto& r : records) {
          if (r.error.empty() && idx < r.cells.size() &&
              std::isfinite(r.cells[idx].pivot)) {
            pivots.push_back(r.cells[idx].pivot);
            pooled.push_back(r.cells[idx].pivot);
          }
        }
        cells.emplace_back(dlasso::variant_tag(v) + "_" + rule.tag(),
                           std::move(pivots));
        ++idx;
      }
    }
    if (!pooled.empty()) {
      const auto edges = dlasso::svg::fd_bin_edges(pooled);
      std::vector<dlasso::svg::BoxGroup> groups;
      for (const auto& [tag, pivots] : cells) {
        if (pivots.size() < 2) continue;
        write_text(fs::path(out_dir) / ("hist_" + tag + ".svg"),
                   dlasso::svg::histogram(pivots, edges, "pivot " + tag));
        groups.push_back({tag, pivots});
      }
      if (!groups.empty()) {
        write_text(fs::path(out_dir) / "box.svg",
                   dlasso::svg::boxplot(groups, "pivots"));
      }
    }
  }

  int n_error = 0;
  for (const auto& r : records) {
    if (!r.error.empty()) ++n_error;
  }
  std::cerr << "wrote " << out_dir << " (" << records.size()
            << " replications, " << n_error << " errors)\n";
  return 0;
}

dlasso::TargetFunctional parse_a0(const std::string& spec,
                                  const dlasso::CovarianceSpec& cov) {
  if (spec.rfind("ej:", 0) == 0) {
    const int j = std::stoi(spec.substr(3));  // 1-based
    return dlasso::direction_canonical(j - 1, cov, /*scaled=*/false);
  }
  dlasso::TargetFunctional t;
  t.a0 = dlasso::csv::read_vector(spec);
  t.label = spec;
  return t;
}

int cmd_debias(const std::string& x_path, const std::string& y_path,
               const std::string& a0_spec, std::optional<double> sigma_known,
               const std::string& cov_spec, const std::string& nu_name,
               double alpha) {
  const Eigen::MatrixXd x = dlasso::csv::read_matrix(x_path);
  const Eigen::VectorXd y = dlasso::csv::read_vector(y_path);
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (y.size() != n) {
    throw std::invalid_argument("X has " + std::to_string(n) + " rows but y has " +
                                std::to_string(y.size()) + " entries");
  }
  const bool cov_known = cov_spec != "unknown";
  dlasso::CovarianceSpec cov =
      cov_known ? dlasso::CovarianceSpec::from_json(load_json_file(cov_spec))
                : dlasso::CovarianceSpec::identity(p);
  if (cov.dim() != p) {
    throw std::invalid_argument("covariance dimension does not match X");
  }
  const dlasso::TargetFunctional target = parse_a0(a0_spec, cov);
  if (target.a0.size() != p) {
    throw std::invalid_argument("a0 length does not match X");
  }

  // noise level: given, or from the scaled Lasso on the main regression
  double sigma = 0.0;
  std::string sigma_source;
  if (sigma_known) {
    sigma = *sigma_known;
    sigma_source = "known";
  } else {
    sigma = dlasso::scaled_lasso(x, y, 1.01 * dlasso::lambda_univ(n, p), {})
                .tau_hat;
    sigma_source = "scaled_lasso";
  }
  if (sigma <= 0.0) {
    throw dlasso::degenerate_error("estimated noise level is zero");
  }

  // s0 is unknown on user data: teaser rule with k = 1
  dlasso::LassoConfig lcfg;
  lcfg.lambda = dlasso::lambda_default(n, p, 1, sigma);
  const dlasso::LassoFit fit = dlasso::lasso_cd(x, y, lcfg);

  const dlasso::NuRule rule = nu_name == "shat"
                                  ? dlasso::NuRule::shat()
                                  : dlasso::NuRule::zero();

  json out;
  dlasso::DebiasedEstimate est;
  if (cov_known) {
    const auto score = dlasso::ideal_score(cov, target, x, sigma);
    est = dlasso::debias_known_sigma(fit, score, y, x, rule);
    dlasso::confidence_interval(est, n, score, alpha);
    out["score"] = "ideal";
  } else {
    dlasso::EstimatedScoreConfig ecfg;
    const auto score = dlasso::estimated_score(x, target, ecfg);
    est = dlasso::debias_estimated_score(fit, score, y, x, rule);
    dlasso::confidence_interval(est, n, score, sigma, alpha);
    out["score"] = "estimated";
    out["tau_hat"] = score.tau_hat;
  }
  out["theta_hat"] = est.theta_hat;
  out["se"] = est.se;
  out["ci_lo"] = est.ci->lo;
  out["ci_hi"] = est.ci->hi;
  out["alpha"] = alpha;
  out["nu"] = est.nu;
  out["n"] = n;
  out["p"] = p;
  out["shat"] = fit.shat();
  out["lambda"] = lcfg.lambda;
  out["sigma"] = sigma;
  out["sigma_source"] = sigma_source;
  out["converged"] = fit.converged;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"De-biased Lasso inference for linear functionals"};
  app.require_subcommand(1);
  app.fallthrough();  // --threads may follow the subcommand
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: env DEBIAS_LASSO_THREADS or 1)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment from a config file");
  std::string sim_config, sim_out = "out", sim_formats = "csv,json,svg";
  int sim_reps = 0;
  sim->add_option("--config", sim_config, "experiment config JSON")->required();
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--format", sim_formats, "comma list of csv,json,svg");
  sim->add_option("--replications", sim_reps, "override replication count");

  // fig1 / fig2 presets
  auto* fig1 = app.add_subcommand("fig1", "sign-direction bias experiment preset");
  int fig1_s0 = 20;
  double fig1_scale = 1.0;
  std::string fig1_out = "fig1_out", fig1_formats = "csv,json,svg";
  int fig1_reps = 0;
  std::uint64_t fig1_seed = 0;
  fig1->add_option("--s0", fig1_s0, "sparsity at the chosen scale")->required();
  fig1->add_option("--scale", fig1_scale, "problem scale in (0,1], 1 = n,p = 4000,6000");
  fig1->add_option("--out", fig1_out, "output directory");
  fig1->add_option("--format", fig1_formats, "comma list of csv,json,svg");
  fig1->add_option("--replications", fig1_reps, "override replication count");
  fig1->add_option("--seed", fig1_seed, "override base seed");

  auto* fig2 = app.add_subcommand("fig2", "correlated-design canonical-direction preset");
  double fig2_scale = 1.0;
  std::string fig2_out = "fig2_out", fig2_formats = "csv,json,svg";
  int fig2_reps = 0;
  std::uint64_t fig2_seed = 0;
  fig2->add_option("--scale", fig2_scale, "problem scale in (0,1]");
  fig2->add_option("--out", fig2_out, "output directory");
  fig2->add_option("--format", fig2_formats, "comma list of csv,json,svg");
  fig2->add_option("--replications", fig2_reps, "override replication count");
  fig2->add_option("--seed", fig2_seed, "override base seed");

  // debias
  auto* deb = app.add_subcommand("debias", "de-biased estimate on user data");
  std::string deb_x, deb_y, deb_a0, deb_cov = "unknown", deb_nu = "shat";
  std::string deb_sigma = "estimate";
  double deb_alpha = 0.05;
  deb->add_option("--x", deb_x, "design matrix CSV (headerless)")->required();
  deb->add_option("--y", deb_y, "response CSV (single column)")->required();
  deb->add_option("--a0", deb_a0, "direction: 'ej:<j>' (1-based) or a CSV vector")->required();
  deb->add_option("--sigma-known", deb_sigma, "noise level, or 'estimate'");
  deb->add_option("--sigma", deb_sigma, "alias of --sigma-known");
  deb->add_option("--cov", deb_cov, "covariance spec JSON, or 'unknown'");
  deb->add_option("--nu", deb_nu, "adjustment: zero or shat");
  deb->add_option("--alpha", deb_alpha, "confidence level alpha");

  // check
  auto* chk = app.add_subcommand("check", "evaluate the sample-size assumption clauses");
  std::string chk_cov, chk_params;
  int chk_n = 0, chk_p = 0, chk_s0 = 0;
  chk->add_option("--cov", chk_cov, "covariance spec JSON")->required();
  chk->add_option("--n", chk_n, "sample size")->required();
  chk->add_option("--p", chk_p, "dimension")->required();
  chk->add_option("--s0", chk_s0, "sparsity")->required();
  chk->add_option("--params", chk_params, "assumption params JSON")->required();

  // rates
  auto* rat = app.add_subcommand("rates", "lower/upper estimation-rate expressions");
  double rat_s0 = 0, rat_somega = 0, rat_rho = 0, rat_n = 0, rat_p = 0;
  double rat_c0u0 = std::nan("");
  rat->add_option("--s0", rat_s0)->required();
  rat->add_option("--somega", rat_somega)->required();
  rat->add_option("--rho", rat_rho)->required();
  rat->add_option("--n", rat_n)->required();
  rat->add_option("--p", rat_p)->required();
  rat->add_option("--c0u0l1", rat_c0u0, "||Sigma^{-1/2}a0||_2 ||u0||_1 for the dense branch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      auto config = dlasso::ExperimentConfig::from_json(load_json_file(sim_config));
      if (sim_reps > 0) config.replications = sim_reps;
      return run_simulation(config, sim_out, parse_formats(sim_formats), threads);
    }
    if (*fig1) {
      // --s0 is the sparsity at the requested scale
      const int s0_full = static_cast<int>(std::llround(fig1_s0 / fig1_scale));
      auto config = dlasso::fig1_config(s0_full, fig1_scale);
      if (config.s0 != fig1_s0) config.s0 = fig1_s0;
      if (fig1_reps > 0) config.replications = fig1_reps;
      if (fig1_seed != 0) config.base_seed = fig1_seed;
      return run_simulation(config, fig1_out, parse_formats(fig1_formats), threads);
    }
    if (*fig2) {
      auto config = dlasso::fig2_config(fig2_scale);
      if (fig2_reps > 0) config.replications = fig2_reps;
      if (fig2_seed != 0) config.base_seed = fig2_seed;
      return run_simulation(config, fig2_out, parse_formats(fig2_formats), threads);
    }
    if (*deb) {
      std::optional<double> sigma_known;
      if (deb_sigma != "estimate") sigma_known = std::stod(deb_sigma);
      return cmd_debias(deb_x, deb_y, deb_a0, sigma_known, deb_cov, deb_nu,
                        deb_alpha);
    }
    if (*chk) {
      const auto cov = dlasso::CovarianceSpec::from_json(load_json_file(chk_cov));
      const auto params =
          dlasso::AssumptionParams::from_json(load_json_file(chk_params));
      const auto report =
          dlasso::check_assumption_main(cov, chk_n, chk_p, chk_s0, params);
      std::cout << report.to_json().dump(2) << "\n";
      return 0;
    }
    if (*rat) {
      const auto r = dlasso::rates(rat_s0, rat_somega, rat_rho, rat_n, rat_p,
                                   rat_c0u0);
      json out{{"r_lower", r.r_lower}, {"r_upper", r.r_upper}};
      if (std::isfinite(r.k_condition)) out["k_condition"] = r.k_condition;
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const json::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dlasso::degenerate_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
