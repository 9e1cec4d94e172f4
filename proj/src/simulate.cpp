#include "dlasso/simulate.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dlasso/csvio.hpp"
#include "dlasso/diagnostics.hpp"
#include "dlasso/model.hpp"
#include "dlasso/stats.hpp"

namespace dlasso {

namespace {

std::string a0_rule_tag(A0Rule r) {
  return r == A0Rule::SgnBetaNormalized ? "sgn_beta_normalized" : "canonical";
}

Variant variant_from_tag(const std::string& tag) {
  if (tag == "ldpe_df") return Variant::LdpeDf;
  if (tag == "plugin_jm") return Variant::PluginJm;
  if (tag == "zz") return Variant::Zz;
  if (tag == "est_score") return Variant::EstimatedScore;
  throw std::invalid_argument("unknown variant '" + tag + "'");
}

NuRule nu_rule_from_tag(const std::string& tag) {
  if (tag == "nu0" || tag == "zero") return NuRule::zero();
  if (tag == "shat") return NuRule::shat();
  if (tag.rfind("nu", 0) == 0) {
    return NuRule::fixed(std::stoi(tag.substr(2)));
  }
  throw std::invalid_argument("unknown nu rule '" + tag + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 1) {
    throw std::invalid_argument("config: replications must be >= 1");
  }
  if (s0 > p || s0 < 0) throw std::invalid_argument("config: need 0 <= s0 <= p");
  if (n < 2) throw std::invalid_argument("config: need n >= 2");
  if (cov_rule == CovRule::Fixed) {
    if (!cov) throw std::invalid_argument("config: fixed rule needs cov");
    if (cov->dim() != p) throw std::invalid_argument("config: cov dim != p");
  }
  if (variants.empty() || nu_rules.empty()) {
    throw std::invalid_argument("config: variants and nu_rules are required");
  }
  if (lambda_rule == LambdaRule::Teaser && s0 == 0) {
    throw std::invalid_argument("config: teaser lambda needs s0 >= 1");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["p"] = p;
  j["s0"] = s0;
  j["sigma"] = sigma;
  if (cov_rule == CovRule::Fixed) {
    j["cov"] = cov ? cov->to_json() : nlohmann::json();
  } else {
    j["cov"] = {{"kind", "rank1inv_from_beta_signs"},
                {"c", rank1_c},
                {"j", rank1_j + 1}};
  }
  j["a0_rule"] = a0_rule_tag(a0_rule);
  j["a0_j"] = a0_j + 1;
  j["a0_scaled"] = a0_scaled;
  j["beta_amplitude"] = beta_amplitude;
  j["beta_signs"] = beta_random_signs ? "random" : "positive";
  if (lambda_rule == LambdaRule::Teaser) {
    j["lambda_rule"] = {{"kind", "teaser"}};
  } else {
    j["lambda_rule"] = {{"kind", "explicit"}, {"lambda", lambda_explicit}};
  }
  j["score"] = score == ScoreType::Ideal ? "ideal" : "estimated";
  std::vector<std::string> vtags;
  for (auto v : variants) vtags.push_back(variant_tag(v));
  j["variants"] = vtags;
  std::vector<std::string> ntags;
  for (const auto& r : nu_rules) ntags.push_back(r.tag());
  j["nu_rules"] = ntags;
  j["replications"] = replications;
  j["base_seed"] = base_seed;
  j["scale_tag"] = scale_tag;
  j["alpha"] = alpha;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.n = j.at("n").get<int>();
  c.p = j.at("p").get<int>();
  c.s0 = j.at("s0").get<int>();
  c.sigma = j.value("sigma", 1.0);
  const auto& covj = j.at("cov");
  if (covj.at("kind").get<std::string>() == "rank1inv_from_beta_signs") {
    c.cov_rule = CovRule::RankOneFromBetaSigns;
    c.rank1_c = covj.at("c").get<double>();
    c.rank1_j = covj.value("j", 0) - 1;
  } else {
    c.cov_rule = CovRule::Fixed;
    c.cov = CovarianceSpec::from_json(covj);
  }
  const std::string a0r = j.value("a0_rule", std::string("sgn_beta_normalized"));
  if (a0r == "sgn_beta_normalized") {
    c.a0_rule = A0Rule::SgnBetaNormalized;
  } else if (a0r == "canonical") {
    c.a0_rule = A0Rule::Canonical;
  } else {
    throw std::invalid_argument("config: unknown a0_rule '" + a0r + "'");
  }
  c.a0_j = j.value("a0_j", 0) - 1;
  c.a0_scaled = j.value("a0_scaled", true);
  c.beta_amplitude = j.value("beta_amplitude", 1.0);
  c.beta_random_signs = j.value("beta_signs", std::string("random")) == "random";
  if (j.contains("lambda_rule")) {
    const auto& lr = j.at("lambda_rule");
    if (lr.at("kind").get<std::string>() == "teaser") {
      c.lambda_rule = LambdaRule::Teaser;
    } else {
      c.lambda_rule = LambdaRule::Explicit;
      c.lambda_explicit = lr.at("lambda").get<double>();
    }
  }
  c.score = j.value("score", std::string("ideal")) == "estimated"
                ? ScoreType::Estimated
                : ScoreType::Ideal;
  if (j.contains("variants")) {
    c.variants.clear();
    for (const auto& v : j.at("variants")) {
      c.variants.push_back(variant_from_tag(v.get<std::string>()));
    }
  }
  if (j.contains("nu_rules")) {
    c.nu_rules.clear();
    for (const auto& r : j.at("nu_rules")) {
      c.nu_rules.push_back(nu_rule_from_tag(r.get<std::string>()));
    }
  }
  c.replications = j.value("replications", 200);
  c.base_seed = j.value("base_seed", std::uint64_t{20260801});
  c.scale_tag = j.value("scale_tag", std::string());
  c.alpha = j.value("alpha", 0.05);
  c.validate();
  return c;
}

namespace {

ReplicationRecord run_one(const ExperimentConfig& cfg, int index) {
  ReplicationRecord rec;
  rec.replicate = index;
  rec.seed = cfg.base_seed + static_cast<std::uint64_t>(index);
  const auto t_start = std::chrono::steady_clock::now();
  try {
    const int s0 = cfg.s0;
    std::vector<int> support(s0);
    for (int i = 0; i < s0; ++i) support[i] = i;

    BetaSpec spec;
    spec.support = support;
    spec.amplitudes = Eigen::VectorXd::Constant(s0, cfg.beta_amplitude);
    if (cfg.beta_random_signs) {
      spec.sign_rule = SignRule::IidRandom;
    } else {
      spec.sign_rule = SignRule::Fixed;
      spec.signs.assign(s0, 1);
    }

    // signs are the first draws of the replication stream; needed up front
    // when the covariance tracks them
    std::vector<int> signs = cfg.beta_random_signs
                                 ? draw_random_signs(s0, rec.seed)
                                 : std::vector<int>(s0, 1);

    CovarianceSpec cov = CovarianceSpec::identity(cfg.p);
    if (cfg.cov_rule == CovRule::Fixed) {
      cov = *cfg.cov;
    } else {
      const int j = cfg.rank1_j >= 0 ? cfg.rank1_j : s0;
      Eigen::VectorXd s_vec = Eigen::VectorXd::Zero(cfg.p);
      for (int i = 0; i < s0; ++i) s_vec(support[i]) = signs[i];
      cov = CovarianceSpec::rank_one_perturbed_inverse(cfg.p, j, cfg.rank1_c,
                                                       s_vec);
    }

    RegressionProblem prob =
        generate_problem(cov, spec, cfg.sigma, cfg.n, rec.seed);
    const Eigen::VectorXd& beta = prob.truth->beta;

    TargetFunctional target;
    if (cfg.a0_rule == A0Rule::SgnBetaNormalized) {
      target = direction_sgn_beta(beta, cov, /*normalize=*/true);
    } else {
      int j = cfg.a0_j >= 0 ? cfg.a0_j : (cfg.rank1_j >= 0 ? cfg.rank1_j : s0);
      target = direction_canonical(j, cov, cfg.a0_scaled);
    }
    rec.theta_true = target.a0.dot(beta);

    LassoConfig lcfg;
    lcfg.lambda = cfg.lambda_rule == LambdaRule::Teaser
                      ? lambda_default(cfg.n, cfg.p, s0, cfg.sigma)
                      : cfg.lambda_explicit;
    const LassoFit fit = lasso_cd(prob.x, prob.y, lcfg);
    rec.shat = fit.shat();
    if (!fit.unique_solution) {
      throw degenerate_error("non-unique solution (lambda = 0, rank-deficient design)");
    }

    // truth-based Fisher information for the pivots
    const double c0_sq = cov.quad_inv(target.a0);
    const double fisher = 1.0 / (cfg.sigma * cfg.sigma * c0_sq);

    std::optional<IdealScore> ideal;
    std::optional<EstimatedScore> estimated;
    if (cfg.score == ScoreType::Ideal) {
      ideal = ideal_score(cov, target, prob.x, cfg.sigma);
    } else {
      EstimatedScoreConfig ecfg;
      estimated = estimated_score(prob.x, target, ecfg);
      rec.inner_zz_over_n = estimated->inner_zz / cfg.n;
      rec.sigma_hat =
          scaled_lasso(prob.x, prob.y, 1.01 * lambda_univ(cfg.n, cfg.p), {})
              .tau_hat;
    }

    for (Variant v : cfg.variants) {
      for (const NuRule& rule : cfg.nu_rules) {
        CellResult cell;
        DebiasedEstimate est;
        switch (v) {
          case Variant::LdpeDf:
            est = debias_known_sigma(fit, *ideal, prob.y, prob.x, rule);
            break;
          case Variant::PluginJm:
            est = debias_plugin(fit, cov, target, prob.y, prob.x,
                                rule.resolve(fit))
                      .estimate;
            break;
          case Variant::Zz:
            est = debias_zz(fit, *ideal, ideal->u0, prob.y, prob.x,
                            rule.resolve(fit));
            break;
          case Variant::EstimatedScore:
            est = debias_estimated_score(fit, *estimated, prob.y, prob.x, rule);
            break;
        }
        cell.theta_hat = est.theta_hat;
        cell.pivot = pivot_value(est, rec.theta_true, fisher, cfg.n);
        if (cfg.score == ScoreType::Ideal) {
          const auto ci = confidence_interval(est, cfg.n, *ideal, cfg.alpha);
          cell.ci_lo = ci.lo;
          cell.ci_hi = ci.hi;
        } else if (std::isfinite(rec.sigma_hat) && rec.sigma_hat > 0) {
          const auto ci = confidence_interval(est, cfg.n, *estimated,
                                              rec.sigma_hat, cfg.alpha);
          cell.ci_lo = ci.lo;
          cell.ci_hi = ci.hi;
        }
        rec.cells.push_back(cell);
      }
    }

    // selection-bias prediction at nu = 0 and the sign-consistency flag
    rec.sign_consistent = true;
    for (int i = 0; i < s0; ++i) {
      const double b = fit.beta(support[i]);
      if ((signs[i] > 0 && b <= 0) || (signs[i] < 0 && b >= 0)) {
        rec.sign_consistent = false;
        break;
      }
    }
    if (s0 >= 1) {
      Eigen::VectorXd sgn_s(s0);
      for (int i = 0; i < s0; ++i) sgn_s(i) = signs[i];
      try {
        rec.predicted_bias =
            predicted_dof_bias(prob.x, support, sgn_s, target.a0, lcfg.lambda,
                               0.0, cfg.n, fisher);
      } catch (const degenerate_error&) {
        // singular X_S'X_S: leave NaN
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.cells.assign(cfg.variants.size() * cfg.nu_rules.size(), CellResult{});
  }
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
  return rec;
}

}  // namespace

std::vector<ReplicationRecord> run_experiment(const ExperimentConfig& config,
                                              int threads) {
  config.validate();
  const int r = config.replications;
  std::vector<ReplicationRecord> records(r);
  const int workers =
      std::max(1, std::min(threads, r));
  if (workers == 1) {
    for (int i = 0; i < r; ++i) records[i] = run_one(config, i);
    return records;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < r; i = next.fetch_add(1)) {
        records[i] = run_one(config, i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

ExperimentConfig fig1_config(int s0_full, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw std::invalid_argument("fig1_config: scale must be in (0, 1]");
  }
  ExperimentConfig c;
  c.n = static_cast<int>(std::llround(4000 * scale));
  c.p = static_cast<int>(std::llround(6000 * scale));
  c.s0 = static_cast<int>(std::llround(s0_full * scale));
  c.sigma = 1.0;
  c.cov_rule = CovRule::Fixed;
  c.cov = CovarianceSpec::identity(c.p);
  c.a0_rule = A0Rule::SgnBetaNormalized;
  c.lambda_rule = LambdaRule::Teaser;
  c.score = ScoreType::Ideal;
  c.variants = {Variant::LdpeDf, Variant::PluginJm};
  c.nu_rules = {NuRule::zero(), NuRule::shat()};
  c.replications = 200;
  c.base_seed = 777777;
  c.scale_tag = "scale=" + std::to_string(scale);
  return c;
}

ExperimentConfig fig2_config(double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw std::invalid_argument("fig2_config: scale must be in (0, 1]");
  }
  ExperimentConfig c;
  c.n = static_cast<int>(std::llround(4000 * scale));
  c.p = static_cast<int>(std::llround(6000 * scale));
  c.s0 = static_cast<int>(std::llround(120 * scale));
  c.sigma = 1.0;
  c.cov_rule = CovRule::RankOneFromBetaSigns;
  // keep c * ||s||_2 = 0.07 sqrt(120) across scales so the perturbation
  // strength is scale-invariant
  c.rank1_c = 0.07 * std::sqrt(120.0 / c.s0);
  c.rank1_j = -1;  // first coordinate outside the support
  c.a0_rule = A0Rule::Canonical;
  c.a0_j = -1;
  c.a0_scaled = true;
  c.lambda_rule = LambdaRule::Teaser;
  c.score = ScoreType::Ideal;
  c.variants = {Variant::LdpeDf};
  c.nu_rules = {NuRule::zero(), NuRule::shat()};
  c.replications = 200;
  c.base_seed = 777777;
  c.scale_tag = "scale=" + std::to_string(scale);
  return c;
}

std::vector<std::string> record_columns(const ExperimentConfig& config) {
  std::vector<std::string> cols{"replicate", "seed", "shat", "theta_true"};
  for (Variant v : config.variants) {
    for (const NuRule& r : config.nu_rules) {
      const std::string suffix = variant_tag(v) + "_" + r.tag();
      cols.push_back("theta_hat_" + suffix);
      cols.push_back("pivot_" + suffix);
    }
  }
  cols.push_back("sigma_hat");
  cols.push_back("predicted_bias");
  cols.push_back("sign_consistent");
  cols.push_back("error");
  return cols;
}

void write_records_csv(std::ostream& out, const ExperimentConfig& config,
                       const std::vector<ReplicationRecord>& records) {
  const auto cols = record_columns(config);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << cols[i];
  }
  out << '\n';
  for (const auto& rec : records) {
    out << rec.replicate << ',' << rec.seed << ',' << rec.shat << ','
        << csv::format_double(rec.theta_true);
    for (const auto& cell : rec.cells) {
      out << ',' << csv::format_double(cell.theta_hat) << ','
          << csv::format_double(cell.pivot);
    }
    out << ',' << csv::format_double(rec.sigma_hat) << ','
        << csv::format_double(rec.predicted_bias) << ','
        << (rec.sign_consistent ? 1 : 0) << ',' << rec.error << '\n';
  }
}

nlohmann::json summarize_records(const ExperimentConfig& config,
                                 const std::vector<ReplicationRecord>& records) {
  nlohmann::json out;
  out["config"] = config.to_json();
  int n_error = 0;
  std::vector<double> shats;
  for (const auto& r : records) {
    if (!r.error.empty()) {
      ++n_error;
    } else {
      shats.push_back(r.shat);
    }
  }
  out["n_replications"] = records.size();
  out["n_error"] = n_error;
  if (shats.size() >= 2) {
    out["mean_shat"] = stats::summarize(shats).mean;
  }

  auto cell_stats = [&](std::size_t cell_idx, auto getter) {
    std::vector<double> vals;
    for (const auto& r : records) {
      if (r.error.empty() && cell_idx < r.cells.size()) {
        vals.push_back(getter(r.cells[cell_idx]));
      }
    }
    nlohmann::json j;
    if (vals.size() >= 2) {
      const auto s = stats::summarize(vals);
      j = {{"count", s.count},     {"mean", s.mean},
           {"sd", s.sd},           {"t_stat", s.t_stat},
           {"p_value", s.p_value}, {"q1", s.q1},
           {"median", s.median},   {"q3", s.q3},
           {"degenerate", s.degenerate}};
    }
    return j;
  };

  nlohmann::json cells;
  std::size_t idx = 0;
  for (Variant v : config.variants) {
    for (const NuRule& rule : config.nu_rules) {
      const std::string key = variant_tag(v) + "_" + rule.tag();
      nlohmann::json cj;
      cj["pivot"] = cell_stats(idx, [](const CellResult& c) { return c.pivot; });
      cj["theta_hat"] =
          cell_stats(idx, [](const CellResult& c) { return c.theta_hat; });
      // empirical CI coverage of the known truth
      int covered = 0, total = 0;
      for (const auto& r : records) {
        if (!r.error.empty() || idx >= r.cells.size()) continue;
        const auto& c = r.cells[idx];
        if (std::isfinite(c.ci_lo) && std::isfinite(c.ci_hi) &&
            std::isfinite(r.theta_true)) {
          ++total;
          if (c.ci_lo <= r.theta_true && r.theta_true <= c.ci_hi) ++covered;
        }
      }
      if (total > 0) cj["coverage"] = double(covered) / total;
      cells[key] = cj;

      // convenience keys used by the preset reports
      if (v == config.variants.front() && rule.kind == NuRule::Kind::Zero &&
          cj["pivot"].contains("mean")) {
        out["mean_pivot_zero"] = cj["pivot"]["mean"];
      }
      if (v == config.variants.front() && rule.kind == NuRule::Kind::Shat &&
          cj["pivot"].contains("mean")) {
        out["mean_pivot_shat"] = cj["pivot"]["mean"];
      }
      ++idx;
    }
  }
  out["cells"] = cells;

  std::vector<double> preds;
  for (const auto& r : records) {
    if (r.error.empty() && r.sign_consistent && std::isfinite(r.predicted_bias)) {
      preds.push_back(r.predicted_bias);
    }
  }
  if (preds.size() >= 2) {
    out["predicted_bias_mean_sign_consistent"] = stats::summarize(preds).mean;
    out["n_sign_consistent"] = preds.size();
  }
  return out;
}

}  // namespace dlasso
