#include "pdmp/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>

#include "pdmp/errors.hpp"

namespace pdmp::stats {

Interval wilson(std::size_t successes, std::size_t trials, double level) {
  if (trials == 0) return {0.0, 0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

double student_t_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t(dof), p);
}

BatchEstimate batch_estimate(std::span<const double> batch_values, double level) {
  BatchEstimate b;
  b.batches = batch_values.size();
  b.mean = mean(batch_values);
  if (b.batches < 2) return b;
  b.std_error = std::sqrt(variance(batch_values) / static_cast<double>(b.batches));
  b.half_width = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(b.batches - 1)) * b.std_error;
  return b;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ContractViolation("KS statistic of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

Regression linear_regression(std::span<const double> x, std::span<const double> y,
                             std::span<const double> weights) {
  if (x.size() != y.size() || x.size() < 3) throw ContractViolation("regression needs >= 3 paired points");
  if (!weights.empty() && weights.size() != x.size()) throw ContractViolation("weights size mismatch");
  const bool weighted = !weights.empty();
  double sw = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double w = weighted ? weights[k] : 1.0;
    sw += w;
    sx += w * x[k];
    sy += w * y[k];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double w = weighted ? weights[k] : 1.0;
    sxx += w * (x[k] - mx) * (x[k] - mx);
    sxy += w * (x[k] - mx) * (y[k] - my);
  }
  Regression r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  if (weighted) {
    r.slope_se = std::sqrt(1.0 / sxx);
  } else {
    double rss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double e = y[k] - r.intercept - r.slope * x[k];
      rss += e * e;
    }
    r.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return r;
}

double beta_cdf(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double exponential_cdf(double rate, double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }

}  // namespace pdmp::stats
