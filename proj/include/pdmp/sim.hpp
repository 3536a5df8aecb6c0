#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdmp/model.hpp"

namespace pdmp {

/// One realised transfer: at time t, `amount` moves along `edge`;
/// amount = q_{edge}(pre-jump state, xi).
struct Event {
  double t = 0.0;
  Edge edge;
  double xi = 0.0;
  double amount = 0.0;
};

struct Sample {
  double t = 0.0;
  std::vector<double> x;
};

/// Initial state, ordered event log and grid samples; enough to replay the path.
struct Trajectory {
  State x0;
  double t_end = 0.0;
  std::vector<Event> events;
  std::vector<double> post_states;  // row-major, events.size() × dim()
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
  std::string model_id;
  /// State at t_end and number of accepted events; set even when events are not recorded.
  std::vector<double> x_end;
  std::size_t event_count = 0;

  std::size_t dim() const { return x0.x.size(); }
  std::span<const double> post_state(std::size_t k) const {
    return {post_states.data() + k * dim(), dim()};
  }
  /// Segments are the flow pieces between consecutive events; there are
  /// events.size() + 1 of them.
  std::size_t segment_count() const { return events.size() + 1; }
  double segment_start(std::size_t k) const { return k == 0 ? 0.0 : events[k - 1].t; }
  double segment_end(std::size_t k) const { return k < events.size() ? events[k].t : t_end; }
  std::span<const double> segment_state(std::size_t k) const {
    return k == 0 ? std::span<const double>(x0.x) : post_state(k - 1);
  }
};

struct SimulationOptions {
  /// Emit samples at k·sample_step, k = 0, 1, ..., up to t_end.
  std::optional<double> sample_step;
  /// Lookahead horizon of the thinning majorant for state-dependent rates.
  double horizon = 1.0;
  /// Random stream index; replica r of a batch uses stream r.
  std::uint64_t stream = 0;
  /// Called for every flow piece [t0, t1] with the state at t0, in time order.
  std::function<void(double t0, std::span<const double> x0, double t1)> on_segment;
  /// When false, events and post-event states are not stored (streaming runs).
  bool record_events = true;
};

/// Exact event-driven sample path on [0, t_end]. Constant rates run on exact
/// exponential clocks; state-dependent rates are thinned against a majorant
/// refreshed at every candidate and at horizon expiry.
Trajectory simulate(const NetworkModel& model, const State& x0, double t_end, std::uint64_t seed,
                    const SimulationOptions& options = {});

/// g_{i,j}: x_i −= amount, x_j += amount. Throws ContractViolation unless
/// 0 ≤ amount ≤ x_i.
State apply_jump(const State& x, Edge e, double amount);
void apply_jump_in_place(std::span<double> x, Edge e, double amount);

/// ‖x‖₁ as the correctly rounded sum of the coordinates.
double total_mass(std::span<const double> x);

/// h_x^k: flow for t_1, jump along edges[0] with quantile xis[0], flow for t_2,
/// ..., ending with a flow for t_k. Needs |times| = k ≥ 1 and |xis| = |edges| = k − 1.
State replay(const NetworkModel& model, const State& x0, std::span<const double> inter_jump_times,
             std::span<const double> quantiles, std::span<const Edge> edges);

struct ReplayInputs {
  std::vector<double> inter_jump_times;
  std::vector<double> quantiles;
  std::vector<Edge> edges;
};

/// Inter-jump times (closing with the final segment up to t_end), quantiles and edges.
ReplayInputs replay_inputs(const Trajectory& traj);

/// Post-jump states obtained by replaying the trajectory's own randomness.
std::vector<std::vector<double>> replay_post_states(const NetworkModel& model, const Trajectory& traj);

/// State at time t in [0, t_end], flowed from the last event at or before t.
std::vector<double> state_at(const NetworkModel& model, const Trajectory& traj, double t);

// ---------------------------------------------------------------------------
// The scaled simplex process S of the multiplicative setting.

struct ScaledEvent {
  double t = 0.0;
  Edge edge;
  double xi = 0.0;
  double fraction = 0.0;
};

struct ScaledTrajectory {
  std::vector<double> s0;
  double t_end = 0.0;
  std::vector<ScaledEvent> events;
  std::vector<double> post_states;  // events.size() × n

  std::span<const double> post_state(std::size_t k) const {
    return {post_states.data() + k * s0.size(), s0.size()};
  }
  std::vector<double> final_state() const;
};

/// True when every non-zero rate is constant and every such edge moves a
/// state-independent fraction of the origin.
bool has_multiplicative_structure(const NetworkModel& model);

/// Pure-jump process on the simplex: at rate θ_{i,j} a fraction ξ ~ μ_{i,j} of
/// S^i moves to S^j. Throws UnsupportedModel for non-multiplicative models.
ScaledTrajectory simulate_scaled(const NetworkModel& model, std::span<const double> s0, double t_end,
                                 std::uint64_t seed, std::uint64_t stream = 0);

void apply_scaled_jump(std::span<double> s, Edge e, double fraction);

/// sup over t in [0, R] of ‖X_t/‖X_t‖₁ − S_t‖₁ with X_0 = R·s0, both processes
/// driven by the same event times, edges and quantiles.
double scaling_gap(const NetworkModel& model, std::span<const double> s0, double R, std::uint64_t seed,
                   std::uint64_t stream = 0);

}  // namespace pdmp
