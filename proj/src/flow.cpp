#include "pdmp/flow.hpp"

#include <algorithm>
#include <cmath>

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeTol = 1e-12;
constexpr double kRelTol = 1e-12;
constexpr double kAbsTol = 1e-14;

// Dormand–Prince 5(4) step for the autonomous scalar equation y' = f(y).
struct Step {
  double y = 0.0;
  double err = 0.0;
};

template <class F>
Step dopri_step(const F& f, double y, double h) {
  const double k1 = f(y);
  const double k2 = f(y + h * (k1 / 5.0));
  const double k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const double k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const double k5 = f(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 -
                               212.0 / 729.0 * k4));
  const double k6 = f(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                               49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
  const double y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                             2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
  const double k7 = f(y5);
  const double e = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1 + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3 +
                        (125.0 / 192.0 - 393.0 / 640.0) * k4 + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5 +
                        (11.0 / 84.0 - 187.0 / 2100.0) * k6 - 1.0 / 40.0 * k7);
  return {y5, std::abs(e)};
}

// Adaptive integration of y' = φ(y) with drain detection at kDrainThreshold.
CoordinateFlow integrate_numeric(const Growth& g, double y0, double dt) {
  auto f = [&g](double y) { return growth_value(g, std::max(y, 0.0)); };
  const bool zero_absorbing = f(0.0) <= 0.0;
  CoordinateFlow out;
  double y = y0;
  if (y <= kDrainThreshold && zero_absorbing) {
    if (y > 0.0) out.drain_time = 0.0;
    out.value = 0.0;
    return out;
  }
  double t = 0.0;
  double h = std::min(dt, 0.1);
  int guard = 0;
  while (t < dt) {
    if (++guard > 10'000'000) throw InternalError("flow integrator did not converge");
    const bool last = h >= dt - t;
    if (last) h = dt - t;
    const Step s = dopri_step(f, y, h);
    const double tol = kAbsTol + kRelTol * std::max(std::abs(y), std::abs(s.y));
    if (s.err <= tol || h <= kTimeTol) {
      if (s.y <= kDrainThreshold && y > kDrainThreshold && zero_absorbing) {
        double lo = 0.0;
        double hi = h;
        for (int it = 0; it < 200 && hi - lo > kTimeTol; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (dopri_step(f, y, mid).y <= kDrainThreshold) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        if (!out.drain_time) out.drain_time = t + hi;
        out.value = 0.0;
        return out;
      }
      y = std::max(s.y, 0.0);
      t = last ? dt : t + h;
    }
    const double ratio = s.err > 0.0 ? tol / s.err : 1e10;
    h *= std::clamp(0.9 * std::pow(ratio, 0.2), 0.2, 5.0);
  }
  out.value = y;
  return out;
}

// Solves w + ln w = L for w > 0 (Newton on v = ln w; convex, started right of the root).
double log_lambert(double L) {
  double v = L >= 1.0 ? std::log(L) : L;
  for (int it = 0; it < 100; ++it) {
    const double ev = std::exp(v);
    const double step = (ev + v - L) / (ev + 1.0);
    v -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(v))) break;
  }
  return std::exp(v);
}

CoordinateFlow flow_constant(const ConstantGrowth& g, double y0, double dt) {
  CoordinateFlow out;
  if (g.c >= 0.0) {
    out.value = y0 + g.c * dt;
    return out;
  }
  if (y0 <= 0.0) return out;
  const double t_drain = y0 / -g.c;
  if (dt >= t_drain) {
    out.drain_time = t_drain;
    return out;
  }
  out.value = std::max(y0 + g.c * dt, 0.0);
  return out;
}

CoordinateFlow flow_sink_release(const SinkReleaseGrowth& g, double y0, double dt) {
  CoordinateFlow out;
  if (y0 <= 0.0) return out;
  if (g.c > 0.0) {
    if (y0 <= kDrainThreshold) {
      out.drain_time = 0.0;
      return out;
    }
    const double t_drain = (g.alpha * std::log(y0 / kDrainThreshold) + (y0 - kDrainThreshold)) / g.c;
    if (dt >= t_drain) {
      out.drain_time = t_drain;
      return out;
    }
  }
  // y + α ln y = y0 + α ln y0 − c t
  const double L = y0 / g.alpha + std::log(y0 / g.alpha) - g.c * dt / g.alpha;
  out.value = g.alpha * log_lambert(L);
  return out;
}

CoordinateFlow flow_affine(const AffineGrowth& g, double y0, double dt) {
  CoordinateFlow out;
  if (g.b == 0.0) {
    out.value = std::max(y0 + g.a * dt, 0.0);
    return out;
  }
  if (g.a == 0.0 && g.b > 0.0) {
    if (y0 <= 0.0) return out;
    if (y0 <= kDrainThreshold) {
      out.drain_time = 0.0;
      return out;
    }
    const double t_drain = std::log(y0 / kDrainThreshold) / g.b;
    if (dt >= t_drain) {
      out.drain_time = t_drain;
      return out;
    }
  }
  const double eq = g.a / g.b;
  out.value = std::max(y0 + (eq - y0) * -std::expm1(-g.b * dt), 0.0);
  return out;
}

}  // namespace

CoordinateFlow flow_coordinate(const Growth& g, double y0, double dt) {
  if (dt < 0.0) throw ContractViolation("flow duration must be >= 0");
  if (dt == 0.0) return {y0, std::nullopt};
  if (const auto* c = std::get_if<ConstantGrowth>(&g)) return flow_constant(*c, y0, dt);
  if (const auto* s = std::get_if<SinkReleaseGrowth>(&g)) return flow_sink_release(*s, y0, dt);
  if (const auto* a = std::get_if<AffineGrowth>(&g)) return flow_affine(*a, y0, dt);
  return integrate_numeric(g, y0, dt);
}

void flow_in_place(const NetworkModel& model, std::span<double> x, double dt, std::vector<DrainEvent>* drains) {
  if (dt < 0.0) throw ContractViolation("flow duration must be >= 0");
  if (dt == 0.0) return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto r = flow_coordinate(model.growth(i), x[i], dt);
    x[i] = r.value;
    if (drains && r.drain_time) drains->push_back({i, *r.drain_time});
  }
}

FlowResult flow(const NetworkModel& model, const State& x, double dt) {
  if (dt < 0.0) throw ContractViolation("flow duration must be >= 0");
  FlowResult out;
  out.x_end = x;
  out.x_end.t = x.t + dt;
  flow_in_place(model, out.x_end.x, dt, &out.drains);
  std::sort(out.drains.begin(), out.drains.end(),
            [](const DrainEvent& a, const DrainEvent& b) { return a.time < b.time; });
  return out;
}

double drain_time(const NetworkModel& model, std::span<const double> x, std::size_t i) {
  if (i >= model.size() || model.patch_class(i) != PatchClass::Sink) {
    throw ContractViolation("drain_time needs a sink patch");
  }
  const double y = x[i];
  if (y <= 0.0) return 0.0;
  const Growth& g = model.growth(i);
  if (const auto* c = std::get_if<ConstantGrowth>(&g)) return c->c < 0.0 ? y / -c->c : kInf;
  if (const auto* s = std::get_if<SinkReleaseGrowth>(&g)) {
    if (s->c <= 0.0) return kInf;
    if (y <= kDrainThreshold) return 0.0;
    return (s->alpha * std::log(y / kDrainThreshold) + (y - kDrainThreshold)) / s->c;
  }
  if (const auto* a = std::get_if<AffineGrowth>(&g)) {
    if (!(a->a == 0.0 && a->b > 0.0)) return kInf;
    return y <= kDrainThreshold ? 0.0 : std::log(y / kDrainThreshold) / a->b;
  }
  constexpr double kHorizon = 1e7;
  const auto r = integrate_numeric(g, y, kHorizon);
  return r.drain_time ? *r.drain_time : kInf;
}

double sum_growth(const NetworkModel& model, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) s += growth_value(model.growth(i), x[i]);
  return s;
}

double coordinate_upper_bound(const Growth& g, double y, double h) {
  if (const auto* a = std::get_if<AffineGrowth>(&g)) {
    if (a->b > 0.0) return std::max(y, a->a / a->b);
    if (a->b == 0.0) return y + std::max(a->a, 0.0) * h;
    return flow_coordinate(g, y, h).value * (1.0 + 1e-12);
  }
  if (const auto* s = std::get_if<SinkReleaseGrowth>(&g)) return s->c >= 0.0 ? y : y + h * std::abs(s->c);
  const double up = std::max(growth_sup(g, 0.0), 0.0);
  return y + up * h;
}

bool has_linear_flow(const Growth& g) {
  if (std::holds_alternative<ConstantGrowth>(g)) return true;
  if (const auto* a = std::get_if<AffineGrowth>(&g)) return a->b == 0.0;
  return false;
}

std::optional<double> coordinate_crossing(const Growth& g, double y0, double dt, double level) {
  if (dt <= 0.0) return std::nullopt;
  const double y1 = flow_coordinate(g, y0, dt).value;
  const bool above0 = y0 > level;
  const bool above1 = y1 > level;
  if (above0 == above1) {
    // a coordinate that starts exactly on `level` and leaves it crosses at 0
    if (y0 == level && y1 != level) return 0.0;
    return std::nullopt;
  }
  if (const auto* c = std::get_if<ConstantGrowth>(&g)) {
    if (c->c == 0.0) return std::nullopt;
    return std::clamp((level - y0) / c->c, 0.0, dt);
  }
  if (const auto* a = std::get_if<AffineGrowth>(&g); a && a->b == 0.0) {
    return std::clamp((level - y0) / a->a, 0.0, dt);
  }
  double lo = 0.0;
  double hi = dt;
  for (int it = 0; it < 200 && hi - lo > kTimeTol * std::max(1.0, dt); ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((flow_coordinate(g, y0, mid).value > level) == above0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace pdmp
