#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "pdmp/builtins.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/flow.hpp"

using namespace pdmp;

TEST_CASE("constant growth flow examples") {
  const auto m = fx::two_patch(1, -2);
  const auto a = flow(m, State{{2.0, 3.0}, 0.0}, 1.0);
  CHECK(a.x_end.x[0] == doctest::Approx(3.0));
  CHECK(a.x_end.x[1] == doctest::Approx(1.0));
  CHECK(a.drains.empty());

  const auto b = flow(m, State{{2.0, 3.0}, 0.0}, 2.0);
  CHECK(b.x_end.x[0] == doctest::Approx(4.0));
  CHECK(b.x_end.x[1] == 0.0);
  REQUIRE(b.drains.size() == 1);
  CHECK(b.drains[0].patch == 1);
  CHECK(b.drains[0].time == doctest::Approx(1.5));

  const auto c = flow(m, State{{2.0, 3.0}, 0.0}, 0.0);
  CHECK(c.x_end.x == std::vector<double>{2.0, 3.0});
  CHECK(c.drains.empty());
  CHECK_THROWS_AS(flow(m, State{{2.0, 3.0}, 0.0}, -1.0), ContractViolation);
}

TEST_CASE("drain times") {
  const auto m = fx::two_patch(1, -2);
  CHECK(drain_time(m, std::vector<double>{0.0, 3.0}, 1) == doctest::Approx(1.5));
  CHECK(drain_time(m, std::vector<double>{0.0, 0.0}, 1) == 0.0);

  NetworkModel s(1);
  s.set_patch(0, PatchClass::Sink, SinkReleaseGrowth{1.0, 1.0});
  // ∫ (1 + y)/y dy from threshold to 1: ln(1/ε) + 1 − ε
  const double eps = kDrainThreshold;
  CHECK(drain_time(s, std::vector<double>{1.0}, 0) == doctest::Approx(std::log(1.0 / eps) + 1.0 - eps).epsilon(1e-9));
}

TEST_CASE("sum_growth examples") {
  const auto m = fx::two_patch(1, -2);
  CHECK(sum_growth(m, std::vector<double>{2.0, 3.0}) == -1.0);
  CHECK(sum_growth(m, std::vector<double>{2.0, 0.0}) == 1.0);
  const auto lu = make_builtin("logistic-unitary");
  // sources saturate at c = 0.5 each, the sink release tends to −2
  CHECK(sum_growth(lu, std::vector<double>{1e12, 1e12, 1e12}) == doctest::Approx(-1.0).epsilon(1e-9));
}

namespace {

// Classic RK4 on a fine fixed grid: an independent reference for the flow.
double rk4(const Growth& g, double y, double dt, int steps) {
  const double h = dt / steps;
  for (int k = 0; k < steps; ++k) {
    auto f = [&](double v) { return v <= 0.0 ? std::max(0.0, growth_value(g, 0.0)) : growth_value(g, v); };
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y = std::max(0.0, y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
  }
  return y;
}

}  // namespace

TEST_CASE("flow matches a fixed-step integrator") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(0.0, 5.0);
  const std::vector<Growth> gs{LogisticGrowth{0.3, 4.0, 0.5}, SinkReleaseGrowth{2.0, 1.0}, AffineGrowth{1.0, 0.7},
                               TabulatedGrowth{{0.0, 1.0, 3.0}, {0.0, -1.0, -0.5}}};
  for (const auto& g : gs) {
    for (int t = 0; t < 20; ++t) {
      const double y = U(gen) + 0.5;
      const double dt = 0.2 + 0.2 * U(gen);
      const auto got = flow_coordinate(g, y, dt).value;
      CHECK(got == doctest::Approx(rk4(g, y, dt, 20000)).epsilon(1e-6));
    }
  }
  // constant growth is piecewise linear; compare against the explicit formula
  for (int t = 0; t < 100; ++t) {
    const double c = U(gen) - 2.5;
    const double y = U(gen);
    const double dt = U(gen);
    const double expect = c >= 0 ? y + c * dt : std::max(0.0, y + c * dt);
    CHECK(std::abs(flow_coordinate(ConstantGrowth{c}, y, dt).value - expect) <= 1e-12);
  }
}

TEST_CASE("flow semigroup, monotone drain and Lipschitz bound") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  const std::vector<NetworkModel> models{fx::two_patch(1, -2), make_builtin("logistic-unitary"),
                                         make_builtin("linear-restoring")};
  for (const auto& m : models) {
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(m.size());
      for (auto& v : x) v = U(gen);
      const double s = U(gen), r = U(gen);
      auto a = x;
      flow_in_place(m, a, s);
      flow_in_place(m, a, r);
      auto b = x;
      flow_in_place(m, b, s + r);
      for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9 * std::max(1.0, b[i]));
    }
  }
  const auto lu = make_builtin("logistic-unitary");
  const double M = lu.m_bound();
  std::vector<double> x{1.0, 4.0, 3.0};
  const double td = drain_time(lu, x, 2);
  double prev = x[2];
  for (double t = 0.1; t <= td + 1.0; t += 0.1) {
    auto y = x;
    flow_in_place(lu, y, t);
    CHECK(y[2] <= prev);
    prev = y[2];
    auto z = x;
    flow_in_place(lu, z, t - 0.1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(y[i] - z[i]) <= M * 0.1 + 1e-12);
  }
  auto at = x;
  flow_in_place(lu, at, td);
  CHECK(at[2] == 0.0);
}
