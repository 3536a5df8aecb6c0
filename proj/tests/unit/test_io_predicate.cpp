#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pdmp/builtins.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/flow.hpp"
#include "pdmp/model_io.hpp"
#include "pdmp/predicate.hpp"
#include "pdmp/sim.hpp"
#include "pdmp/trajectory_io.hpp"

using namespace pdmp;

TEST_CASE("trajectory file round trip is exact") {
  const auto m = make_builtin("logistic-unitary");
  SimulationOptions opt;
  opt.sample_step = 1.0;
  const auto t = simulate(m, State{{2.0, 1.0, 3.0}, 0.0}, 30.0, 4, opt);
  const auto text = trajectory_to_string(t);
  std::istringstream in(text);
  const auto back = read_trajectory(in);
  CHECK(trajectory_to_string(back) == text);
  REQUIRE(back.events.size() == t.events.size());
  for (std::size_t k = 0; k < t.events.size(); ++k) {
    CHECK(back.events[k].t == t.events[k].t);
    CHECK(back.events[k].xi == t.events[k].xi);
    CHECK(back.events[k].amount == t.events[k].amount);
  }
  CHECK(back.post_states == t.post_states);
  CHECK(back.seed == 4);
  CHECK(back.model_id == "logistic-unitary");
}

TEST_CASE("malformed trajectory files are rejected") {
  for (const char* bad : {"", "# pdmpnet-trajectory v2\n", "# pdmpnet-trajectory v1\n# model=- seed=1 n=2 t_end=1\nrecord\n",
                          "# pdmpnet-trajectory v1\n# model=- seed=1 n=2 t_end=1\nrecord,t,i,j,xi,amount,x1,x2\n"
                          "init,0,,,,,1,1\nevent,0.5,1,2,0.5,0.5,0.5,1.5\nevent,0.4,1,2,0.5,0.1,0.4,1.6\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_trajectory(in), ConfigError);
  }
}

TEST_CASE("model description round trip") {
  for (const auto& b : list_builtin_models()) {
    CAPTURE(b.name);
    const auto m = make_builtin(b.name);
    const auto j = model_to_json(m);
    const auto back = model_from_json(j);
    CHECK(model_to_json(back) == j);
    CHECK(back.live_edges() == m.live_edges());
    CHECK(back.active_edges() == m.active_edges());
  }
}

TEST_CASE("model descriptions reject unknown keys and bad indices") {
  auto j = model_to_json(fx::two_patch(1, -2));
  auto k = j;
  k["colour"] = "red";
  CHECK_THROWS_AS(model_from_json(k), ConfigError);
  k = j;
  k["edges"][0]["to"] = 3;
  CHECK_THROWS_AS(model_from_json(k), ConfigError);
  k = j;
  k["patches"][0]["growth"]["type"] = "exotic";
  CHECK_THROWS_AS(model_from_json(k), ConfigError);
  k = j;
  k["format_version"] = 2;
  CHECK_THROWS_AS(model_from_json(k), ConfigError);
  k = j;
  k["edges"][0]["rate"]["extra"] = 1;
  CHECK_THROWS_AS(model_from_json(k), ConfigError);
}

TEST_CASE("predicate grammar") {
  const auto p = Predicate::parse("min(1,2) >= 10 && sum >= 50", 3);
  CHECK(p.atoms().size() == 2);
  CHECK(p.is_region());
  CHECK(p(std::vector<double>{10.0, 20.0, 30.0}));
  CHECK_FALSE(p(std::vector<double>{9.0, 20.0, 30.0}));
  CHECK_FALSE(p(std::vector<double>{10.0, 10.0, 29.0}));

  const auto q = Predicate::parse("x2 > 0", 2);
  CHECK_FALSE(q.is_region());
  CHECK(q(std::vector<double>{0.0, 1e-300}));
  CHECK_FALSE(q(std::vector<double>{5.0, 0.0}));
  CHECK(Predicate::parse("true", 4)(std::vector<double>{0, 0, 0, 0}));
  CHECK(Predicate::parse(p.to_string(), 3).to_string() == p.to_string());

  for (const char* bad : {"x3 > 0", "x0 > 0", "min() >= 1", "x1 >", "x1 ~ 2", "sum >= 1 &&"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(Predicate::parse(bad, 2), ConfigError);
  }
}

TEST_CASE("time in set along a flow matches a fine grid") {
  const std::vector<std::pair<NetworkModel, std::vector<double>>> cases{
      {fx::two_patch(1, -2), {2.0, 3.0}},
      {make_builtin("logistic-unitary"), {0.5, 4.0, 2.0}},
  };
  for (const auto& [m, x0] : cases) {
    for (const char* text : {"x2 > 0", "sum >= 6", "min(1,2) >= 2.5", "x1 <= 3 && sum > 5"}) {
      CAPTURE(text);
      const auto pred = Predicate::parse(text, m.size());
      const double dt = 3.0;
      const int N = 200000;
      double brute = 0.0;
      std::vector<double> y;
      for (int k = 0; k < N; ++k) {
        y = x0;
        flow_in_place(m, y, (k + 0.5) * dt / N);
        if (pred(y)) brute += dt / N;
      }
      CHECK(segment_time_in_set(m, x0, dt, pred) == doctest::Approx(brute).epsilon(1e-4));
      const auto first = segment_first_entry(m, x0, dt, pred);
      if (brute > 0) CHECK(first.has_value());
    }
  }
}
