#include <cmath>
#include <random>

#include "doctest.h"
#include "pdmp/rng.hpp"
#include "pdmp/stats.hpp"

using namespace pdmp;

TEST_CASE("wilson interval reference values") {
  // 8 successes in 10 trials at 95%: (0.4902, 0.9433)
  const auto w = stats::wilson(8, 10);
  CHECK(w.estimate == doctest::Approx(0.8));
  CHECK(w.lo == doctest::Approx(0.4902).epsilon(1e-3));
  CHECK(w.hi == doctest::Approx(0.9433).epsilon(1e-3));
  const auto z = stats::wilson(0, 20);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
}

TEST_CASE("quantiles") {
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(stats::student_t_quantile(0.975, 19) == doctest::Approx(2.093024).epsilon(1e-6));
  CHECK(stats::ks_critical_1pct(10000) == doctest::Approx(1.628 / 100.0));
}

TEST_CASE("batch estimate") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto b = stats::batch_estimate(v);
  CHECK(b.mean == doctest::Approx(5.5));
  CHECK(b.std_error == doctest::Approx(std::sqrt(110.0 / 12.0 / 10.0)));
  CHECK(b.half_width == doctest::Approx(stats::student_t_quantile(0.975, 9) * b.std_error));
}

TEST_CASE("ks statistic and p-value") {
  std::vector<double> u;
  for (int k = 0; k < 100; ++k) u.push_back((k + 0.5) / 100.0);
  CHECK(stats::ks_statistic(u, [](double x) { return x; }) == doctest::Approx(0.005));
  CHECK(stats::ks_pvalue(0.005, 100) == doctest::Approx(1.0));
  // asymptotic 1% point: p(1.628/√n) ≈ 0.01 for large n
  CHECK(stats::ks_pvalue(1.628 / 100.0, 10000) == doctest::Approx(0.01).epsilon(0.05));

  Rng rng(1, 0);
  std::vector<double> e;
  for (int k = 0; k < 20000; ++k) e.push_back(rng.exponential(2.0));
  const double d = stats::ks_statistic(e, [](double x) { return stats::exponential_cdf(2.0, x); });
  CHECK(stats::ks_pvalue(d, e.size()) > 0.01);
  const double wrong = stats::ks_statistic(e, [](double x) { return stats::exponential_cdf(2.2, x); });
  CHECK(stats::ks_pvalue(wrong, e.size()) < 1e-6);
}

TEST_CASE("regression") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{3, 5, 7, 9, 11};
  const auto r = stats::linear_regression(x, y);
  CHECK(r.slope == doctest::Approx(2.0));
  CHECK(r.intercept == doctest::Approx(1.0));
  CHECK(r.slope_se == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("beta cdf") {
  CHECK(stats::beta_cdf(1, 1, 0.3) == doctest::Approx(0.3));
  CHECK(stats::beta_cdf(2, 1, 0.5) == doctest::Approx(0.25));
  CHECK(stats::beta_cdf(2, 3, 1.0) == 1.0);
}

TEST_CASE("rng streams") {
  Rng a(5, 0), b(5, 0), c(5, 1);
  CHECK(a.next_u64() == b.next_u64());
  Rng a2(5, 0);
  CHECK(a2.next_u64() != c.next_u64());
  Rng r(9, 3);
  for (int k = 0; k < 100000; ++k) {
    const double u = r.uniform();
    CHECK((u > 0.0 && u < 1.0));
  }
  CHECK(std::isinf(r.exponential(0.0)));
  double s = 0;
  for (int k = 0; k < 100000; ++k) s += static_cast<double>(r.geometric(0.25));
  CHECK(s / 100000 == doctest::Approx(4.0).epsilon(0.02));
}
