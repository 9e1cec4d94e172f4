#pragma once

#include <cstdint>
#include <vector>

namespace dlasso::stats {

double normal_cdf(double x);
double normal_quantile(double p);

// Student t distribution with df > 0 degrees of freedom.
double t_cdf(double x, double df);
double t_quantile(double p, double df);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// log C(n, k) computed through lgamma.
double log_binomial(std::int64_t n, std::int64_t k);

// Linear-interpolation quantile (the common "type 7" definition) of an
// already sorted sample; q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

struct Summary {
  std::size_t count = 0;  // finite values used
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
  double t_stat = 0.0;
  double p_value = 1.0;  // two-sided test of zero mean, t with count-1 df
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  bool degenerate = false;  // sd == 0
};

// One-sample two-sided t-test of mean zero plus boxplot quartiles.
// Non-finite entries are dropped; fewer than two finite values is an error.
Summary summarize(const std::vector<double>& values);

}  // namespace dlasso::stats
