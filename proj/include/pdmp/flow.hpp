#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pdmp/model.hpp"

namespace pdmp {

/// Populations below this level are declared drained for sinks that only empty
/// asymptotically (sink release, affine decay, tabulated laws vanishing at 0).
inline constexpr double kDrainThreshold = 1e-9;

struct DrainEvent {
  std::size_t patch = 0;
  double time = 0.0;
};

struct FlowResult {
  State x_end;
  std::vector<DrainEvent> drains;  // sorted by time
};

/// One coordinate of Φ. `drain_time` is set when the coordinate reaches 0
/// inside (0, dt] (or starts below the drain threshold).
struct CoordinateFlow {
  double value = 0.0;
  std::optional<double> drain_time;
};

CoordinateFlow flow_coordinate(const Growth& g, double y0, double dt);

/// Φ(x, dt). Coordinates evolve independently; drained coordinates are clamped
/// to exactly 0. Throws ContractViolation for dt < 0.
FlowResult flow(const NetworkModel& model, const State& x, double dt);

/// Overwrites `x` with Φ(x, dt); appends drains (unsorted) when requested.
void flow_in_place(const NetworkModel& model, std::span<double> x, double dt,
                   std::vector<DrainEvent>* drains = nullptr);

/// Smallest t with Φ^i(x, t) = 0 for a sink i (thresholded for asymptotic
/// variants); +inf when the coordinate never drains.
double drain_time(const NetworkModel& model, std::span<const double> x, std::size_t i);

/// Σ_i φ^i(x).
double sum_growth(const NetworkModel& model, std::span<const double> x);

/// Upper bound on Φ^i over [0, h] started from y.
double coordinate_upper_bound(const Growth& g, double y, double h);

/// Time in (0, dt] at which the (monotone) coordinate path started at y0 passes
/// `level`, if it does.
std::optional<double> coordinate_crossing(const Growth& g, double y0, double dt, double level);

/// True when the coordinate path is piecewise linear in time (constant growth).
bool has_linear_flow(const Growth& g);

}  // namespace pdmp
