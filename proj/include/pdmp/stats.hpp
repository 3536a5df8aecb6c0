#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pdmp::stats {

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion at the given two-sided level.
Interval wilson(std::size_t successes, std::size_t trials, double level = 0.95);

double mean(std::span<const double> v);
/// Unbiased sample variance; 0 for fewer than two values.
double variance(std::span<const double> v);

double normal_quantile(double p);
double student_t_quantile(double p, double dof);

/// Mean of batch averages with a Student-t half-width at the given level.
struct BatchEstimate {
  double mean = 0.0;
  double half_width = 0.0;
  double std_error = 0.0;
  std::size_t batches = 0;
};
BatchEstimate batch_estimate(std::span<const double> batch_values, double level = 0.95);

/// sup |F_n − F| for a sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic p-value of the one-sample KS statistic (Stephens' small-sample correction).
double ks_pvalue(double d, std::size_t n);
/// Critical value of the one-sample KS statistic at level 0.01.
double ks_critical_1pct(std::size_t n);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
/// Least squares y ≈ a + b x; with weights, weighted least squares with known
/// variances 1/w (slope_se from the weights alone).
Regression linear_regression(std::span<const double> x, std::span<const double> y,
                             std::span<const double> weights = {});

double beta_cdf(double a, double b, double x);
double exponential_cdf(double rate, double x);

}  // namespace pdmp::stats
