#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "pdmp/builtins.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/model.hpp"

using namespace pdmp;

TEST_CASE("validate_model on simple models") {
  CHECK(validate_model(fx::two_patch(1, -2)).ok());

  auto bad_sign = fx::two_patch(1, -2);
  bad_sign.set_patch(1, PatchClass::Sink, ConstantGrowth{1.0});
  const auto r1 = validate_model(bad_sign);
  CHECK(r1.has(IssueKind::AssumptionA));
  CHECK_FALSE(r1.blocks_simulation());

  auto zero_active = fx::two_patch(1, -2);
  zero_active.set_transfer({0, 1}, ZeroRate{}, UniformFraction{}, true);
  CHECK(validate_model(zero_active).has(IssueKind::ActiveGraph));
}

TEST_CASE("built-in examples validate and single-field corruptions are rejected") {
  for (const char* name : {"constant-multiplicative", "constant-unitary", "logistic-unitary"}) {
    CAPTURE(name);
    const auto m = make_builtin(name);
    CHECK(validate_model(m).ok());

    auto sign = m;
    sign.set_patch(m.size() - 1, PatchClass::Sink, ConstantGrowth{1.0});
    CHECK_FALSE(validate_model(sign).ok());

    auto cls = m;
    cls.set_patch(0, PatchClass::Sink, m.growth(0));
    CHECK(validate_model(cls).has(IssueKind::AssumptionA));

    const Edge e = m.active_edges().front();
    auto neg = m;
    neg.set_transfer(e, ConstantRate{-1.0}, m.transfer(e).amplitude);
    CHECK(validate_model(neg).blocks_simulation());

    auto zero = m;
    zero.set_transfer(e, ZeroRate{}, m.transfer(e).amplitude);
    CHECK(validate_model(zero).has(IssueKind::ActiveGraph));

    auto steep = m;
    steep.set_transfer(e, PowerLawRate{2.0}, UnitDirac{});
    CHECK(validate_model(steep).has(IssueKind::RateShape));

    auto improper = m;
    improper.set_transfer(e, m.transfer(e).rate, RelativeLaw({0.0, 1.0}, {2.0, 2.0}));
    CHECK(validate_model(improper).blocks_simulation());

    auto bound = m;
    bound.set_m_bound(1e-6);
    CHECK(validate_model(bound).has(IssueKind::GrowthBound));
  }
  auto lu = make_builtin("logistic-unitary");
  lu.set_patch(2, PatchClass::Sink, SinkReleaseGrowth{2.0, -1.0});
  CHECK(validate_model(lu).blocks_simulation());
  lu = make_builtin("logistic-unitary");
  lu.set_transfer({0, 2}, CoerciveRate{0.0, 0.0, 1.0, 1.0, 2.0}, UnitDirac{});
  CHECK(validate_model(lu).blocks_simulation());
}

TEST_CASE("quantile examples") {
  const auto m = fx::two_patch(1, -2);
  const std::vector<double> x{4.0, 1.0};
  CHECK(quantile(m, {0, 1}, x, 0.25) == doctest::Approx(1.0));

  NetworkModel u(2);
  u.set_patch(0, PatchClass::Source, ConstantGrowth{1});
  u.set_patch(1, PatchClass::Sink, ConstantGrowth{-2});
  u.set_transfer({0, 1}, PowerLawRate{1.0}, UnitDirac{});
  const std::vector<double> small{0.3, 0.0};
  for (double xi : {0.01, 0.5, 1.0}) CHECK(quantile(u, {0, 1}, small, xi) == doctest::Approx(0.3));

  NetworkModel r(2);
  r.set_patch(0, PatchClass::Source, ConstantGrowth{1});
  r.set_patch(1, PatchClass::Sink, ConstantGrowth{-2});
  r.set_transfer({0, 1}, ConstantRate{1}, RelativeLaw({0.0, 1.0}, {0.0, 2.0}));
  // cdf u² = 0.25 at u = 0.5, scaled by x_1 = 2
  CHECK(quantile(r, {0, 1}, std::vector<double>{2.0, 0.0}, 0.25) == doctest::Approx(1.0));
}

TEST_CASE("debit examples") {
  const auto m = fx::two_patch(1, -2);
  CHECK(debit(m, std::vector<double>{4.0, 0.0}, {0, 1}) == doctest::Approx(2.0));
  NetworkModel z = fx::two_patch(1, -2, 0.0, 0.0);
  CHECK(debit(z, std::vector<double>{4.0, 1.0}, {0, 1}) == 0.0);
  NetworkModel u(2);
  u.set_patch(0, PatchClass::Source, ConstantGrowth{1});
  u.set_patch(1, PatchClass::Sink, ConstantGrowth{-2});
  u.set_transfer({0, 1}, PowerLawRate{1.0}, UnitDirac{});
  CHECK(debit(u, std::vector<double>{3.0, 0.0}, {0, 1}) == doctest::Approx(3.0));
}

TEST_CASE("quantile properties") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 10.0);
  std::vector<NetworkModel> models{fx::two_patch(1, -2), make_builtin("constant-unitary"),
                                   make_builtin("linear-restoring")};
  for (const auto& m : models) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x(m.size());
      for (auto& v : x) v = U(gen);
      for (const Edge e : m.live_edges()) {
        double prev = 0.0;
        for (int k = 0; k <= 20; ++k) {
          const double q = quantile(m, e, x, k / 20.0);
          CHECK(q >= 0.0);
          CHECK(q <= x[e.from]);
          CHECK(q >= prev);
          prev = q;
        }
        auto x0 = x;
        x0[e.from] = 0.0;
        CHECK(debit(m, x0, e) == 0.0);
      }
    }
  }
  // empirical mean of the uniform quantile is x_i/2
  const auto m = fx::two_patch(1, -2);
  std::uniform_real_distribution<double> xi(0.0, 1.0);
  const std::vector<double> x{6.0, 1.0};
  double s = 0.0;
  const int N = 200000;
  for (int k = 0; k < N; ++k) s += quantile(m, {0, 1}, x, xi(gen));
  CHECK(std::abs(s / N - 3.0) < 4.0 * 6.0 / std::sqrt(12.0 * N));
}

TEST_CASE("relative law moments") {
  const auto law = RelativeLaw::uniform(0.2, 0.6);
  CHECK(law.mean() == doctest::Approx(0.4));
  CHECK(law.mass() == doctest::Approx(1.0));
  CHECK(law.cdf(0.4) == doctest::Approx(0.5));
  CHECK(law.quantile(0.5) == doctest::Approx(0.4));
  CHECK_THROWS_AS(RelativeLaw({0.5, 0.2}, {1.0, 1.0}), ContractViolation);
}

TEST_CASE("custom quantile amplitude mean uses the midpoint rule") {
  NetworkModel m(2);
  m.set_patch(0, PatchClass::Source, ConstantGrowth{1});
  m.set_patch(1, PatchClass::Sink, ConstantGrowth{-2});
  m.set_transfer({0, 1}, ConstantRate{1},
                 CustomQuantile{[](std::span<const double> x, double xi) { return xi * xi * x[0]; }, "square"});
  // E[ξ²] = 1/3; the 1024-point midpoint rule is off by 1/(12·1024²)
  const double expect = 3.0 * (1.0 / 3.0 - 1.0 / (12.0 * 1024.0 * 1024.0));
  CHECK(amplitude_mean(m, {0, 1}, std::vector<double>{3.0, 0.0}) == doctest::Approx(expect).epsilon(1e-12));
}
