#include "pdmp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pdmp/errors.hpp"
#include "pdmp/flow.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LiveEdge {
  Edge edge;
  const Rate* rate = nullptr;
  bool constant = false;
};

std::vector<LiveEdge> collect_live(const NetworkModel& model) {
  std::vector<LiveEdge> out;
  for (const Edge e : model.live_edges()) {
    const Rate& r = model.transfer(e).rate;
    out.push_back({e, &r, std::holds_alternative<ConstantRate>(r)});
  }
  return out;
}

std::size_t pick(std::span<const double> weights, double total, double u) {
  double target = u * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (target < weights[k]) return k;
    target -= weights[k];
  }
  // rounding left us past the end: last edge with positive weight
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  throw InternalError("categorical draw over empty weights");
}

}  // namespace

void apply_jump_in_place(std::span<double> x, Edge e, double amount) {
  if (e.from >= x.size() || e.to >= x.size() || e.from == e.to) throw ContractViolation("bad jump edge");
  if (!(amount >= 0.0) || amount > x[e.from]) {
    throw ContractViolation("jump amount must lie in [0, x_from]");
  }
  x[e.from] = x[e.from] - amount;
  x[e.to] = x[e.to] + amount;
}

double total_mass(std::span<const double> x) {
  // Shewchuk's exact partials, rounded once at the end
  std::vector<double> partials;
  for (double v : x) {
    std::size_t used = 0;
    for (std::size_t k = 0; k < partials.size(); ++k) {
      double y = partials[k];
      if (std::abs(v) < std::abs(y)) std::swap(v, y);
      const double hi = v + y;
      const double lo = y - (hi - v);
      if (lo != 0.0) partials[used++] = lo;
      v = hi;
    }
    partials.resize(used);
    partials.push_back(v);
  }
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x0 = hi;
    const double y = partials[--n];
    hi = x0 + y;
    lo = y - (hi - x0);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x1 = hi + y;
    if (y == x1 - hi) hi = x1;
  }
  return hi;
}

State apply_jump(const State& x, Edge e, double amount) {
  State out = x;
  apply_jump_in_place(out.x, e, amount);
  return out;
}

Trajectory simulate(const NetworkModel& model, const State& x0, double t_end, std::uint64_t seed,
                    const SimulationOptions& options) {
  if (!(t_end >= 0.0)) throw ContractViolation("t_end must be >= 0");
  if (x0.x.size() != model.size()) throw ContractViolation("initial state has the wrong dimension");
  for (double v : x0.x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ContractViolation("initial state must be finite and >= 0");
  }
  if (options.sample_step && !(*options.sample_step > 0.0)) throw ContractViolation("sample step must be > 0");
  if (!(options.horizon > 0.0)) throw ContractViolation("thinning horizon must be > 0");
  require_simulable(model);

  Trajectory traj;
  traj.x0 = State{x0.x, 0.0};
  traj.t_end = t_end;
  traj.seed = seed;
  traj.model_id = model.name;

  Rng rng(seed, options.stream);
  const auto live = collect_live(model);
  const bool all_constant = std::all_of(live.begin(), live.end(), [](const auto& l) { return l.constant; });

  std::vector<double> anchor = x0.x;  // state right after the last event
  double t_anchor = 0.0;
  std::vector<double> cur = anchor;
  double t = 0.0;
  std::vector<double> majorant(live.size(), 0.0);
  double total = 0.0;

  auto state_from_anchor = [&](double when, std::vector<double>& out) {
    out = anchor;
    flow_in_place(model, out, when - t_anchor);
  };

  std::size_t next_sample = 0;
  std::vector<double> sample_buf;
  auto emit_samples_until = [&](double limit) {
    if (!options.sample_step) return;
    for (;;) {
      const double ts = static_cast<double>(next_sample) * *options.sample_step;
      if (ts > limit || ts > t_end) return;
      state_from_anchor(ts, sample_buf);
      traj.samples.push_back({ts, sample_buf});
      ++next_sample;
    }
  };

  auto refresh_majorants = [&]() {
    total = 0.0;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const auto& l = live[k];
      if (l.constant) {
        majorant[k] = std::get<ConstantRate>(*l.rate).theta;
      } else {
        const double xi_max =
            coordinate_upper_bound(model.growth(l.edge.from), cur[l.edge.from], options.horizon);
        majorant[k] = rate_upper_bound(*l.rate, xi_max);
      }
      total += majorant[k];
    }
  };

  refresh_majorants();
  for (;;) {
    if (!all_constant) refresh_majorants();
    const double horizon_end = all_constant ? kInf : t + options.horizon;
    const double t_cand = t + rng.exponential(total);

    if (t_cand >= t_end && horizon_end >= t_end) {
      emit_samples_until(t_end);
      if (options.on_segment) options.on_segment(t_anchor, anchor, t_end);
      state_from_anchor(t_end, traj.x_end);
      break;
    }
    if (t_cand >= horizon_end) {
      emit_samples_until(horizon_end);
      t = horizon_end;
      state_from_anchor(t, cur);
      continue;
    }

    // candidate strictly inside (t, min(horizon_end, t_end))
    emit_samples_until(std::nextafter(t_cand, -kInf));
    t = t_cand;
    state_from_anchor(t, cur);
    const std::size_t k = pick(majorant, total, rng.uniform());
    const auto& l = live[k];
    bool accept = l.constant;
    if (!accept) {
      const double theta = rate_value(*l.rate, cur, l.edge);
      if (theta > majorant[k] * (1.0 + 1e-9) + 1e-300) {
        throw InternalError("thinning majorant exceeded on edge (" + std::to_string(l.edge.from + 1) + "," +
                            std::to_string(l.edge.to + 1) + ")");
      }
      accept = rng.uniform() * majorant[k] < theta;
    }
    if (!accept) continue;

    const double xi = rng.uniform();
    const double amount = quantile(model, l.edge, cur, xi);
    if (options.on_segment) options.on_segment(t_anchor, anchor, t);
    apply_jump_in_place(cur, l.edge, amount);
    if (options.record_events) {
      traj.events.push_back({t, l.edge, xi, amount});
      traj.post_states.insert(traj.post_states.end(), cur.begin(), cur.end());
    }
    ++traj.event_count;
    anchor = cur;
    t_anchor = t;
  }
  return traj;
}

State replay(const NetworkModel& model, const State& x0, std::span<const double> inter_jump_times,
             std::span<const double> quantiles, std::span<const Edge> edges) {
  const std::size_t k = inter_jump_times.size();
  if (k == 0 || quantiles.size() + 1 != k || edges.size() + 1 != k) {
    throw ContractViolation("replay needs k flow times and k-1 quantiles and edges");
  }
  State x = x0;
  for (std::size_t m = 0; m < k; ++m) {
    flow_in_place(model, x.x, inter_jump_times[m]);
    x.t += inter_jump_times[m];
    if (m + 1 < k) {
      const double amount = quantile(model, edges[m], x.x, quantiles[m]);
      apply_jump_in_place(x.x, edges[m], amount);
    }
  }
  return x;
}

ReplayInputs replay_inputs(const Trajectory& traj) {
  ReplayInputs in;
  double last = 0.0;
  for (const auto& ev : traj.events) {
    in.inter_jump_times.push_back(ev.t - last);
    in.quantiles.push_back(ev.xi);
    in.edges.push_back(ev.edge);
    last = ev.t;
  }
  in.inter_jump_times.push_back(traj.t_end - last);
  return in;
}

std::vector<std::vector<double>> replay_post_states(const NetworkModel& model, const Trajectory& traj) {
  std::vector<std::vector<double>> out;
  out.reserve(traj.events.size());
  std::vector<double> x = traj.x0.x;
  double last = 0.0;
  for (const auto& ev : traj.events) {
    flow_in_place(model, x, ev.t - last);
    apply_jump_in_place(x, ev.edge, quantile(model, ev.edge, x, ev.xi));
    out.push_back(x);
    last = ev.t;
  }
  return out;
}

std::vector<double> state_at(const NetworkModel& model, const Trajectory& traj, double t) {
  if (t < 0.0 || t > traj.t_end) throw ContractViolation("time outside the trajectory");
  const auto it = std::upper_bound(traj.events.begin(), traj.events.end(), t,
                                   [](double v, const Event& e) { return v < e.t; });
  const auto k = static_cast<std::size_t>(it - traj.events.begin());
  const auto base = traj.segment_state(k);
  std::vector<double> x(base.begin(), base.end());
  flow_in_place(model, x, t - traj.segment_start(k));
  return x;
}

// ---------------------------------------------------------------------------

std::vector<double> ScaledTrajectory::final_state() const {
  if (events.empty()) return s0;
  const auto s = post_state(events.size() - 1);
  return {s.begin(), s.end()};
}

bool has_multiplicative_structure(const NetworkModel& model) {
  for (const Edge e : model.live_edges()) {
    const auto& tr = model.transfer(e);
    if (!std::holds_alternative<ConstantRate>(tr.rate) || !is_relative(tr.amplitude)) return false;
  }
  return true;
}

void apply_scaled_jump(std::span<double> s, Edge e, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ContractViolation("fraction must lie in [0, 1]");
  apply_jump_in_place(s, e, std::min(fraction * s[e.from], s[e.from]));
}

namespace {

struct ScaledEdge {
  Edge edge;
  double theta;
  RelativeLaw law;
};

std::vector<ScaledEdge> scaled_edges(const NetworkModel& model) {
  if (!has_multiplicative_structure(model)) {
    throw UnsupportedModel("scaled process needs constant rates and relative amplitudes on every live edge");
  }
  std::vector<ScaledEdge> out;
  for (const Edge e : model.live_edges()) {
    const auto& tr = model.transfer(e);
    out.push_back({e, std::get<ConstantRate>(tr.rate).theta, *relative_law(tr.amplitude)});
  }
  return out;
}

void check_simplex(std::span<const double> s0, std::size_t n) {
  if (s0.size() != n) throw ContractViolation("simplex state has the wrong dimension");
  double sum = 0.0;
  for (double v : s0) {
    if (!(v >= 0.0)) throw ContractViolation("simplex state must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ContractViolation("simplex state must sum to 1");
}

}  // namespace

ScaledTrajectory simulate_scaled(const NetworkModel& model, std::span<const double> s0, double t_end,
                                 std::uint64_t seed, std::uint64_t stream) {
  if (!(t_end >= 0.0)) throw ContractViolation("t_end must be >= 0");
  const auto edges = scaled_edges(model);
  check_simplex(s0, model.size());

  ScaledTrajectory traj;
  traj.s0.assign(s0.begin(), s0.end());
  traj.t_end = t_end;
  std::vector<double> weights;
  double total = 0.0;
  for (const auto& e : edges) {
    weights.push_back(e.theta);
    total += e.theta;
  }
  Rng rng(seed, stream);
  std::vector<double> s = traj.s0;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(total);
    if (t >= t_end) break;
    const auto& e = edges[pick(weights, total, rng.uniform())];
    const double xi = rng.uniform();
    const double fraction = e.law.quantile(xi);
    apply_scaled_jump(s, e.edge, fraction);
    traj.events.push_back({t, e.edge, xi, fraction});
    traj.post_states.insert(traj.post_states.end(), s.begin(), s.end());
  }
  return traj;
}

double scaling_gap(const NetworkModel& model, std::span<const double> s0, double R, std::uint64_t seed,
                   std::uint64_t stream) {
  if (!(R > 0.0)) throw ContractViolation("scale R must be > 0");
  const auto edges = scaled_edges(model);
  check_simplex(s0, model.size());
  require_simulable(model);

  std::vector<double> weights;
  double total = 0.0;
  for (const auto& e : edges) {
    weights.push_back(e.theta);
    total += e.theta;
  }
  const std::size_t n = model.size();
  std::vector<double> s(s0.begin(), s0.end());
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = R * s[i];
  std::vector<double> probe(n);
  double gap = 0.0;

  auto distance = [&](std::span<const double> xs) {
    const double norm = std::accumulate(xs.begin(), xs.end(), 0.0);
    if (!(norm > 0.0)) return 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += std::abs(xs[i] / norm - s[i]);
    return d;
  };
  // max of the distance over a flow piece: ends, drain kinks and a few interior points
  auto scan_segment = [&](double dt) {
    std::vector<double> times{0.25 * dt, 0.5 * dt, 0.75 * dt, dt};
    for (std::size_t i = 0; i < n; ++i) {
      if (auto r = flow_coordinate(model.growth(i), x[i], dt); r.drain_time && *r.drain_time <= dt) {
        times.push_back(*r.drain_time);
      }
    }
    for (double tau : times) {
      probe = x;
      flow_in_place(model, probe, tau);
      gap = std::max(gap, distance(probe));
    }
  };

  Rng rng(seed, stream);
  double t = 0.0;
  gap = distance(x);
  for (;;) {
    const double t_next = t + rng.exponential(total);
    const double t_stop = std::min(t_next, R);
    scan_segment(t_stop - t);
    flow_in_place(model, x, t_stop - t);
    t = t_stop;
    if (t_next >= R) break;
    const auto& e = edges[pick(weights, total, rng.uniform())];
    const double xi = rng.uniform();
    const double fraction = e.law.quantile(xi);
    apply_scaled_jump(s, e.edge, fraction);
    apply_jump_in_place(x, e.edge, quantile(model, e.edge, x, xi));
    gap = std::max(gap, distance(x));
  }
  return gap;
}

}  // namespace pdmp
