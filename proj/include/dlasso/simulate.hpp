#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlasso/covariance.hpp"
#include "dlasso/debias.hpp"

namespace dlasso {

enum class A0Rule { SgnBetaNormalized, Canonical };
enum class LambdaRule { Teaser, Explicit };
enum class ScoreType { Ideal, Estimated };
// The covariance is either fixed up front or rebuilt per replication as
// Sigma^{-1} = I + c (sgn(beta) e_j' + e_j sgn(beta)') from the drawn signs.
enum class CovRule { Fixed, RankOneFromBetaSigns };

struct ExperimentConfig {
  int n = 0;
  int p = 0;
  int s0 = 0;
  double sigma = 1.0;

  CovRule cov_rule = CovRule::Fixed;
  std::optional<CovarianceSpec> cov;  // required when cov_rule == Fixed
  double rank1_c = 0.0;
  int rank1_j = -1;  // -1: first index outside the support

  A0Rule a0_rule = A0Rule::SgnBetaNormalized;
  int a0_j = -1;  // canonical coordinate; -1 follows rank1_j
  bool a0_scaled = true;

  double beta_amplitude = 1.0;
  bool beta_random_signs = true;

  LambdaRule lambda_rule = LambdaRule::Teaser;
  double lambda_explicit = 0.0;

  ScoreType score = ScoreType::Ideal;
  std::vector<Variant> variants{Variant::LdpeDf};
  std::vector<NuRule> nu_rules{NuRule::zero(), NuRule::shat()};

  int replications = 200;
  std::uint64_t base_seed = 20260801;
  std::string scale_tag;
  double alpha = 0.05;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct CellResult {
  double theta_hat = std::nan("");
  double pivot = std::nan("");
  double ci_lo = std::nan("");
  double ci_hi = std::nan("");
};

struct ReplicationRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  int shat = 0;
  double theta_true = std::nan("");
  std::vector<CellResult> cells;  // variants x nu_rules, config order
  double sigma_hat = std::nan("");
  double predicted_bias = std::nan("");  // dof-bias prediction at nu = 0
  bool sign_consistent = false;  // signs match on the true support
  std::string error;             // nonempty: replication failed, cells NaN
  double inner_zz_over_n = std::nan("");  // estimated score only; not serialized
  double elapsed_ms = 0.0;                // not serialized
};

// Runs the experiment; records are identical for identical configs regardless
// of the number of worker threads. Per-replication failures are recorded in
// the row and do not abort the batch.
std::vector<ReplicationRecord> run_experiment(const ExperimentConfig& config,
                                              int threads = 1);

// Desk/full-scale presets. s0_full is the full-scale sparsity; (n, p, s0)
// are multiplied by `scale` and rounded.
ExperimentConfig fig1_config(int s0_full, double scale);
ExperimentConfig fig2_config(double scale);

// records.csv column names, fixed order.
std::vector<std::string> record_columns(const ExperimentConfig& config);
void write_records_csv(std::ostream& out, const ExperimentConfig& config,
                       const std::vector<ReplicationRecord>& records);

// Per-cell summaries (pivot and theta_hat), selection size, coverage.
nlohmann::json summarize_records(const ExperimentConfig& config,
                                 const std::vector<ReplicationRecord>& records);

}  // namespace dlasso
