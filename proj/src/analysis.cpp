#include "pdmp/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pdmp/errors.hpp"
#include "pdmp/flow.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/stability.hpp"

namespace pdmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 5-point Gauss–Legendre on [0, 1]; exact for polynomials of degree ≤ 9.
constexpr double kGlNodes[5] = {
    0.5 - 0.5 * 0.9061798459386640, 0.5 - 0.5 * 0.5384693101056831, 0.5,
    0.5 + 0.5 * 0.5384693101056831, 0.5 + 0.5 * 0.9061798459386640,
};
constexpr double kGlWeights[5] = {
    0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665, 0.5 * 0.5688888888888889,
    0.5 * 0.4786286704993665, 0.5 * 0.2369268850561891,
};
constexpr int kMaxExactDegree = 8;
constexpr int kMidpointNodes = 1024;

double shifted_value(const TestFunction& f, std::span<const double> x, Edge e, double y,
                     std::vector<double>& buf) {
  buf.assign(x.begin(), x.end());
  buf[e.from] -= y;
  buf[e.to] += y;
  return f.value(buf);
}

// ∫ (f(x + y(e_j − e_i)) − f(x)) μ_{i,j}(x, dy)
double jump_integral(const NetworkModel& model, const TestFunction& f, std::span<const double> x, Edge e,
                     double fx, std::vector<double>& buf) {
  const double xi_pop = x[e.from];
  if (xi_pop <= 0.0) return 0.0;
  const auto& amp = model.transfer(e).amplitude;
  const bool exact = f.degree >= 0 && f.degree <= kMaxExactDegree;

  if (std::holds_alternative<UnitDirac>(amp)) return shifted_value(f, x, e, std::min(1.0, xi_pop), buf) - fx;

  if (exact && std::holds_alternative<UniformFraction>(amp)) {
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += kGlWeights[k] * shifted_value(f, x, e, kGlNodes[k] * xi_pop, buf);
    return s - fx;
  }
  if (const auto* law = std::get_if<RelativeLaw>(&amp); law && exact) {
    // f(x + u x_i Δ)·p(u) is a polynomial of degree ≤ deg f + 1 on each knot interval
    const auto& kn = law->knots();
    const auto& dn = law->density();
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < kn.size(); ++k) {
      const double a = kn[k];
      const double w = kn[k + 1] - kn[k];
      for (int q = 0; q < 5; ++q) {
        const double u = a + w * kGlNodes[q];
        const double p = dn[k] + (dn[k + 1] - dn[k]) * kGlNodes[q];
        s += w * kGlWeights[q] * p * shifted_value(f, x, e, u * xi_pop, buf);
      }
    }
    return s / law->mass() - fx;
  }
  double s = 0.0;
  for (int k = 0; k < kMidpointNodes; ++k) {
    s += shifted_value(f, x, e, quantile(model, e, x, (k + 0.5) / kMidpointNodes), buf);
  }
  return s / kMidpointNodes - fx;
}

// Integrates every g over the flow from x0 on [a, b] (offsets from the segment start).
void integrate_flow(const NetworkModel& model, std::span<const double> x0, double a, double b,
                    std::span<const std::function<double(std::span<const double>)>> gs, std::span<double> acc,
                    std::vector<double>& buf) {
  if (b <= a) return;
  std::vector<double> cuts{a, b};
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (auto r = flow_coordinate(model.growth(i), x0[i], b); r.drain_time && *r.drain_time > a && *r.drain_time < b) {
      cuts.push_back(*r.drain_time);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p];
    const double w = cuts[p + 1] - lo;
    if (w <= 0.0) continue;
    for (int q = 0; q < 5; ++q) {
      buf.assign(x0.begin(), x0.end());
      flow_in_place(model, buf, lo + w * kGlNodes[q]);
      for (std::size_t g = 0; g < gs.size(); ++g) acc[g] += w * kGlWeights[q] * gs[g](buf);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

TestFunction constant_function(double c) {
  return {"const", [c](std::span<const double>) { return c; },
          [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); }, 0};
}

TestFunction coordinate_function(std::size_t i) {
  return {"x" + std::to_string(i + 1), [i](std::span<const double> x) { return x[i]; },
          [i](std::span<const double>, std::span<double> g) {
            std::fill(g.begin(), g.end(), 0.0);
            g[i] = 1.0;
          },
          1};
}

TestFunction total_function() {
  return {"sum", [](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); },
          [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 1.0); }, 1};
}

TestFunction coordinate_square_function(std::size_t i) {
  return {"x" + std::to_string(i + 1) + "^2", [i](std::span<const double> x) { return x[i] * x[i]; },
          [i](std::span<const double> x, std::span<double> g) {
            std::fill(g.begin(), g.end(), 0.0);
            g[i] = 2.0 * x[i];
          },
          2};
}

double generator_apply(const NetworkModel& model, const TestFunction& f, std::span<const double> x) {
  if (x.size() != model.size()) throw ContractViolation("state has the wrong dimension");
  const std::size_t n = model.size();
  std::vector<double> grad(n, 0.0);
  f.gradient(x, grad);
  double drift = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (grad[k] != 0.0) drift += grad[k] * growth_value(model.growth(k), x[k]);
  }
  const double fx = f.value(x);
  std::vector<double> buf;
  double jumps = 0.0;
  for (const Edge e : model.live_edges()) {
    const double theta = rate_value(model.transfer(e).rate, x, e);
    if (theta == 0.0) continue;
    jumps += theta * jump_integral(model, f, x, e, fx, buf);
  }
  return drift + jumps;
}

std::vector<DynkinResult> dynkin_check(const NetworkModel& model, std::span<const TestFunction> fs,
                                       std::span<const double> x, double h, std::size_t replicas,
                                       std::uint64_t seed) {
  if (!(h > 0.0)) throw ContractViolation("h must be > 0");
  if (replicas < 2) throw ContractViolation("dynkin check needs at least 2 replicas");
  const std::size_t m = fs.size();
  std::vector<double> sum(m, 0.0), sum_sq(m, 0.0), gen_sum(m, 0.0), fx(m), ax(m);
  for (std::size_t k = 0; k < m; ++k) {
    fx[k] = fs[k].value(x);
    ax[k] = generator_apply(model, fs[k], x);
  }
  const State x0{std::vector<double>(x.begin(), x.end()), 0.0};
  for (std::size_t r = 0; r < replicas; ++r) {
    SimulationOptions opt;
    opt.stream = r;
    opt.record_events = false;
    const auto traj = simulate(model, x0, h, seed, opt);
    for (std::size_t k = 0; k < m; ++k) {
      const double d = fs[k].value(traj.x_end) - fx[k];
      sum[k] += d;
      sum_sq[k] += d * d;
      gen_sum[k] += generator_apply(model, fs[k], traj.x_end);
    }
  }
  const double N = static_cast<double>(replicas);
  std::vector<DynkinResult> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double mean = sum[k] / N;
    const double var = std::max(0.0, (sum_sq[k] - N * mean * mean) / (N - 1.0));
    auto& r = out[k];
    r.finite_difference = mean / h;
    r.std_error = std::sqrt(var / N) / h;
    r.generator = ax[k];
    r.bias_allowance = 0.5 * std::abs(gen_sum[k] / N - ax[k]);
    const double excess = std::max(0.0, std::abs(r.finite_difference - r.generator) - r.bias_allowance);
    r.z = excess == 0.0 ? 0.0 : (r.std_error > 0.0 ? excess / r.std_error : kInf);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> batch_time_averages(
    const NetworkModel& model, const Trajectory& traj,
    std::span<const std::function<double(std::span<const double>)>> gs, const PathWindow& w) {
  if (!(w.burn_in >= 0.0 && w.burn_in < 1.0) || w.batches == 0) throw ContractViolation("bad averaging window");
  if (!(traj.t_end > 0.0)) throw ContractViolation("trajectory has zero length");
  const double start = w.burn_in * traj.t_end;
  const double width = (traj.t_end - start) / static_cast<double>(w.batches);
  std::vector<double> edges(w.batches + 1);
  for (std::size_t b = 0; b <= w.batches; ++b) edges[b] = start + width * static_cast<double>(b);
  edges.back() = traj.t_end;

  std::vector<std::vector<double>> acc(w.batches, std::vector<double>(gs.size(), 0.0));
  std::vector<double> buf;
  std::size_t b = 0;
  for (std::size_t k = 0; k < traj.segment_count(); ++k) {
    const double t0 = traj.segment_start(k);
    const double t1 = traj.segment_end(k);
    if (t1 <= start) continue;
    const auto x0 = traj.segment_state(k);
    while (b < w.batches && edges[b + 1] <= t0) ++b;
    for (std::size_t bb = b; bb < w.batches && edges[bb] < t1; ++bb) {
      const double lo = std::max(t0, edges[bb]);
      const double hi = std::min(t1, edges[bb + 1]);
      integrate_flow(model, x0, lo - t0, hi - t0, gs, acc[bb], buf);
    }
  }
  std::vector<std::vector<double>> out(gs.size(), std::vector<double>(w.batches));
  for (std::size_t bb = 0; bb < w.batches; ++bb) {
    const double len = edges[bb + 1] - edges[bb];
    for (std::size_t g = 0; g < gs.size(); ++g) out[g][bb] = acc[bb][g] / len;
  }
  return out;
}

StationaryStats stationary_residuals(const NetworkModel& model, std::span<const Trajectory> trajs,
                                     std::span<const TestFunction> fs, const PathWindow& w) {
  if (trajs.empty()) throw ContractViolation("no trajectories");
  const std::size_t n = model.size();
  const auto live = model.live_edges();

  StationaryStats out;
  const auto cls = classify(model);
  if (cls.classification != Classification::Ergodic) {
    out.warnings.push_back("model is classified " + std::string(to_string(cls.classification)) +
                           "; stationary relations may not apply");
  }

  std::vector<std::function<double(std::span<const double>)>> gs;
  std::vector<std::string> labels;
  for (const auto& f : fs) {
    gs.push_back([&model, &f](std::span<const double> x) { return generator_apply(model, f, x); });
    labels.push_back("A[" + f.name + "]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    gs.push_back([&model, &live, i](std::span<const double> x) {
      double s = growth_value(model.growth(i), x[i]);
      for (const Edge e : live) {
        if (e.to == i) s += debit(model, x, e);
        if (e.from == i) s -= debit(model, x, e);
      }
      return s;
    });
    labels.push_back("balance[" + std::to_string(i + 1) + "]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    gs.push_back([i](std::span<const double> x) { return x[i]; });
    labels.push_back("mean[" + std::to_string(i + 1) + "]");
  }
  for (const Edge e : live) {
    gs.push_back([&model, e](std::span<const double> x) { return debit(model, x, e); });
    labels.push_back("debit[" + std::to_string(e.from + 1) + "," + std::to_string(e.to + 1) + "]");
  }

  std::vector<std::vector<double>> pooled(gs.size());
  for (const auto& traj : trajs) {
    if (traj.dim() != n) throw ContractViolation("trajectory dimension does not match the model");
    const auto avg = batch_time_averages(model, traj, gs, w);
    for (std::size_t g = 0; g < gs.size(); ++g) pooled[g].insert(pooled[g].end(), avg[g].begin(), avg[g].end());
    out.span += (1.0 - w.burn_in) * traj.t_end;
  }
  std::size_t g = 0;
  auto take = [&](std::vector<StationaryEstimate>& dst, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k, ++g) dst.push_back({labels[g], stats::batch_estimate(pooled[g], w.level)});
  };
  take(out.generator_means, fs.size());
  take(out.balance, n);
  take(out.means, n);
  take(out.debits, live.size());
  return out;
}

std::vector<double> restoring_means(std::span<const double> a, std::span<const double> m) {
  const std::size_t n = a.size();
  if (m.size() != n || n == 0) throw ContractViolation("a and m must have the same positive length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] >= 0.0) || !(m[i] >= 0.0)) throw ContractViolation("a and m must be >= 0");
  }
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      A(i, j) = i == j ? 1.0 + m[i] * static_cast<double>(n - 1) : -m[j];
    }
    rhs(i) = a[i];
  }
  const Eigen::VectorXd E = A.partialPivLu().solve(rhs);
  return {E.data(), E.data() + n};
}

double restoring_residual(std::span<const double> a, std::span<const double> m, std::span<const double> E) {
  const std::size_t n = a.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = (1.0 + m[i] * static_cast<double>(n - 1)) * E[i] - a[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) s -= m[j] * E[j];
    }
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

// Time in set on [max(t0, from), t1] of a flow piece started at x0 at time t0.
double clipped_time_in_set(const NetworkModel& model, std::span<const double> x0, double t0, double t1, double from,
                           const Predicate& pred, std::vector<double>& buf) {
  if (t1 <= from) return 0.0;
  if (t0 >= from) return segment_time_in_set(model, x0, t1 - t0, pred);
  buf.assign(x0.begin(), x0.end());
  flow_in_place(model, buf, from - t0);
  return segment_time_in_set(model, buf, t1 - from, pred);
}

}  // namespace

std::optional<double> one_exit_occupancy(const NetworkModel& model) {
  const std::size_t n = model.size();
  if (n < 2) return std::nullopt;
  double up = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto* c = std::get_if<ConstantGrowth>(&model.growth(i));
    if (!c) return std::nullopt;
    if (i + 1 < n) {
      if (c->c < 0.0) return std::nullopt;
      up += c->c;
    } else if (!(c->c < 0.0)) {
      return std::nullopt;
    }
  }
  return up / -std::get<ConstantGrowth>(model.growth(n - 1)).c;
}

double occupancy(const NetworkModel& model, const Trajectory& traj, const Predicate& pred, double from) {
  if (!(traj.t_end > from)) throw ContractViolation("occupancy window is empty");
  std::vector<double> buf;
  double inside = 0.0;
  for (std::size_t k = 0; k < traj.segment_count(); ++k) {
    inside += clipped_time_in_set(model, traj.segment_state(k), traj.segment_start(k), traj.segment_end(k), from,
                                  pred, buf);
  }
  return std::clamp(inside / (traj.t_end - from), 0.0, 1.0);
}

OccupancyMeter::OccupancyMeter(const NetworkModel& model, Predicate pred, double from, std::size_t batches,
                               double t_end)
    : model_(&model), pred_(std::move(pred)), from_(from), t_end_(t_end), batch_inside_(batches, 0.0) {
  if (batches > 0 && !(t_end > from)) throw ContractViolation("batched occupancy needs t_end > from");
}

void OccupancyMeter::operator()(double t0, std::span<const double> x0, double t1) {
  std::vector<double> buf;
  if (t1 <= from_) return;
  total_ += t1 - std::max(t0, from_);
  if (batch_inside_.empty()) {
    inside_ += clipped_time_in_set(*model_, x0, t0, t1, from_, pred_, buf);
    return;
  }
  const double width = (t_end_ - from_) / static_cast<double>(batch_inside_.size());
  const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((std::max(t0, from_) - from_) / width)));
  for (std::size_t b = first; b < batch_inside_.size(); ++b) {
    const double lo = from_ + width * static_cast<double>(b);
    const double hi = b + 1 == batch_inside_.size() ? t_end_ : lo + width;
    if (lo >= t1) break;
    const double a = std::max(lo, t0);
    const double z = std::min(hi, t1);
    if (z <= a) continue;
    buf.assign(x0.begin(), x0.end());
    flow_in_place(*model_, buf, a - t0);
    const double in = segment_time_in_set(*model_, buf, z - a, pred_);
    batch_inside_[b] += in;
    inside_ += in;
  }
}

double OccupancyMeter::fraction() const { return total_ > 0.0 ? std::clamp(inside_ / total_, 0.0, 1.0) : 0.0; }

std::vector<double> OccupancyMeter::batch_fractions() const {
  std::vector<double> out(batch_inside_.size());
  const double width = (t_end_ - from_) / static_cast<double>(batch_inside_.size());
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = batch_inside_[b] / width;
  return out;
}

EnsembleOccupancy endpoint_occupancy(const NetworkModel& model, std::span<const double> x0, double t_end,
                                     const Predicate& pred, std::size_t replicas, std::uint64_t seed) {
  if (replicas == 0) throw ContractViolation("replicas must be >= 1");
  const State s0{std::vector<double>(x0.begin(), x0.end()), 0.0};
  std::size_t hits = 0;
  for (std::size_t r = 0; r < replicas; ++r) {
    SimulationOptions opt;
    opt.stream = r;
    opt.record_events = false;
    if (pred(simulate(model, s0, t_end, seed, opt).x_end)) ++hits;
  }
  return {stats::wilson(hits, replicas), replicas};
}

double log_f_moment(const NetworkModel& model, const Trajectory& traj, double eta, double from) {
  if (!(eta > 0.0)) throw ContractViolation("eta must be > 0");
  if (!(traj.t_end > from)) throw ContractViolation("moment window is empty");
  double log_acc = -kInf;
  auto add = [&](double log_term) {
    if (log_term == -kInf) return;
    const double hi = std::max(log_acc, log_term);
    log_acc = hi + std::log(std::exp(log_acc - hi) + std::exp(log_term - hi));
  };
  std::vector<double> buf;
  for (std::size_t k = 0; k < traj.segment_count(); ++k) {
    const double t0 = traj.segment_start(k);
    const double t1 = traj.segment_end(k);
    if (t1 <= from) continue;
    const auto x0 = traj.segment_state(k);
    const double a = std::max(t0, from) - t0;
    const double b = t1 - t0;
    std::vector<double> cuts{a, b};
    for (std::size_t i = 0; i < model.size(); ++i) {
      if (auto r = flow_coordinate(model.growth(i), x0[i], b); r.drain_time && *r.drain_time > a && *r.drain_time < b) {
        cuts.push_back(*r.drain_time);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double w = cuts[p + 1] - cuts[p];
      if (w <= 0.0) continue;
      for (int q = 0; q < 5; ++q) {
        buf.assign(x0.begin(), x0.end());
        flow_in_place(model, buf, cuts[p] + w * kGlNodes[q]);
        const double total = std::accumulate(buf.begin(), buf.end(), 0.0);
        add(std::log(w * kGlWeights[q]) + eta * std::sqrt(std::max(total, 0.0)));
      }
    }
  }
  return log_acc - std::log(traj.t_end - from);
}

Correlation indicator_total_correlation(const NetworkModel& model, const Trajectory& traj, std::size_t patch,
                                        double step, double burn_in) {
  if (patch >= model.size()) throw ContractViolation("patch index out of range");
  if (!(step > 0.0)) throw ContractViolation("step must be > 0");
  std::vector<double> ind;
  std::vector<double> tot;
  std::size_t k = 0;
  std::vector<double> buf;
  for (double t = burn_in * traj.t_end; t <= traj.t_end; t += step) {
    while (k < traj.events.size() && traj.events[k].t <= t) ++k;
    const auto x0 = traj.segment_state(k);
    buf.assign(x0.begin(), x0.end());
    flow_in_place(model, buf, t - traj.segment_start(k));
    ind.push_back(buf[patch] > 0.0 ? 1.0 : 0.0);
    tot.push_back(std::accumulate(buf.begin(), buf.end(), 0.0));
  }
  Correlation c;
  c.samples = ind.size();
  if (c.samples < 4) return c;
  const double mi = stats::mean(ind);
  const double mt = stats::mean(tot);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t s = 0; s < ind.size(); ++s) {
    sxy += (ind[s] - mi) * (tot[s] - mt);
    sxx += (ind[s] - mi) * (ind[s] - mi);
    syy += (tot[s] - mt) * (tot[s] - mt);
  }
  if (sxx == 0.0 || syy == 0.0) return c;
  c.r = sxy / std::sqrt(sxx * syy);
  const double z = std::atanh(std::clamp(c.r, -0.999999, 0.999999));
  const double hw = 1.959963984540054 / std::sqrt(static_cast<double>(c.samples) - 3.0);
  c.half_width = std::max(std::tanh(z + hw) - c.r, c.r - std::tanh(z - hw));
  return c;
}

// ---------------------------------------------------------------------------

void validate(const DriftWalkParams& p) {
  if (!(p.eps > 0.0 && p.eps <= 1.0) || !(p.delta > 0.0 && p.delta <= 1.0)) {
    throw ContractViolation("eps and delta must lie in (0, 1]");
  }
  if (!(p.c > 0.0) || !(p.T > 0.0) || !(p.T_prime > 0.0) || !(p.M > 0.0)) {
    throw ContractViolation("c, T, T', M must be > 0");
  }
}

GammaRate gamma_rate(double r, const DriftWalkParams& p) {
  validate(p);
  GammaRate g;
  const double tm = p.T * p.M;
  g.r_max = p.delta >= 1.0 ? kInf : std::log(1.0 / (1.0 - p.delta)) / tm;
  if (!(r >= 0.0) || !(r < g.r_max)) {
    g.warnings.push_back("r outside (0, ln(1/(1-delta))/(TM))");
    return g;
  }
  g.in_domain = true;
  const double denom = std::exp(-r * tm) - (1.0 - p.delta);
  g.value = -std::log(p.delta * (1.0 - p.eps) / denom + p.eps * std::exp(-r * p.c * p.T_prime));
  if (g.value <= 0.0 && r > 0.0) g.warnings.push_back("gamma(r) <= 0: the walk drifts upward at this r");
  if (drift_walk_mean_increment(p) >= 0.0) g.warnings.push_back("mean increment is >= 0");
  return g;
}

double drift_walk_mean_increment(const DriftWalkParams& p) {
  return -p.eps * p.c * p.T_prime + (1.0 - p.eps) * (p.T / p.delta) * p.M;
}

namespace {

double walk_increment(const DriftWalkParams& p, Rng& rng) {
  if (rng.bernoulli(p.eps)) return -p.c * p.T_prime;
  return static_cast<double>(rng.geometric(p.delta)) * p.T * p.M;
}

}  // namespace

std::vector<double> drift_walk(const DriftWalkParams& p, double y0, std::size_t steps, std::uint64_t seed,
                               std::uint64_t stream) {
  validate(p);
  Rng rng(seed, stream);
  std::vector<double> y;
  y.reserve(steps);
  if (steps == 0) return y;
  y.push_back(y0);
  while (y.size() < steps) y.push_back(y.back() + walk_increment(p, rng));
  return y;
}

MartingaleCheck martingale_check(const DriftWalkParams& p, double r, std::size_t replicas, std::size_t steps,
                                 std::uint64_t seed) {
  const auto g = gamma_rate(r, p);
  if (!g.in_domain) throw ContractViolation("r outside the domain of gamma");
  if (replicas < 2 || steps < 3) throw ContractViolation("martingale check needs >= 2 replicas and >= 3 steps");
  MartingaleCheck out;
  out.gamma = g.value;
  out.mean_increment_theory = drift_walk_mean_increment(p);
  std::vector<double> sum(steps, 0.0), sum_sq(steps, 0.0);
  double inc_sum = 0.0;
  Rng rng(seed, 0);
  for (std::size_t rep = 0; rep < replicas; ++rep) {
    double y = 0.0;  // Y_k − Y_1
    for (std::size_t k = 0; k < steps; ++k) {
      if (k > 0) {
        const double d = walk_increment(p, rng);
        y += d;
        inc_sum += d;
      }
      const double w = std::exp(r * y + g.value * static_cast<double>(k));
      sum[k] += w;
      sum_sq[k] += w * w;
    }
  }
  const double N = static_cast<double>(replicas);
  out.mean_increment = inc_sum / (N * static_cast<double>(steps - 1));
  std::vector<double> ks, ms, ws;
  for (std::size_t k = 0; k < steps; ++k) {
    const double m = sum[k] / N;
    const double var = std::max(0.0, (sum_sq[k] - N * m * m) / (N - 1.0));
    const double se = std::sqrt(var / N);
    out.means.push_back(m);
    out.std_errors.push_back(se);
    if (se > 0.0) {
      ks.push_back(static_cast<double>(k + 1));
      ms.push_back(m);
      ws.push_back(1.0 / (se * se));
    }
  }
  if (ks.size() >= 3) {
    out.slope = stats::linear_regression(ks, ms, ws);
    out.slope_z = out.slope.slope_se > 0.0 ? out.slope.slope / out.slope.slope_se : 0.0;
  }
  return out;
}

HittingBound hitting_time_bound(const DriftWalkParams& p, double r, double y0, double R, std::size_t replicas,
                                std::size_t max_steps, std::uint64_t seed) {
  const auto g = gamma_rate(r, p);
  if (!g.in_domain) throw ContractViolation("r outside the domain of gamma");
  if (replicas < 2) throw ContractViolation("hitting bound needs >= 2 replicas");
  Rng rng(seed, 1);
  std::vector<double> vals;
  HittingBound out;
  for (std::size_t rep = 0; rep < replicas; ++rep) {
    double y = y0;
    std::size_t k = 1;
    while (y > R && k < max_steps) {
      y += walk_increment(p, rng);
      ++k;
    }
    if (y > R) ++out.censored;
    vals.push_back(std::exp(g.value * static_cast<double>(k - 1)));
  }
  out.lhs = stats::mean(vals);
  const double se = std::sqrt(stats::variance(vals) / static_cast<double>(vals.size()));
  out.lhs_lower = out.lhs - 1.959963984540054 * se;
  out.rhs = std::exp(r * (y0 - R + p.c * p.T_prime));
  out.holds = out.lhs_lower <= out.rhs;
  return out;
}

// ---------------------------------------------------------------------------

BetaDiagnostic fit_beta(std::span<const double> sample, double expected_ratio) {
  BetaDiagnostic d;
  d.replicas = sample.size();
  d.expected_ratio = expected_ratio;
  if (sample.size() < 3) {
    d.failure = "fewer than 3 samples";
    return d;
  }
  const double m = stats::mean(sample);
  const double v = stats::variance(sample);
  d.sample_mean = m;
  if (!(m > 0.0 && m < 1.0) || !(v > 0.0)) {
    d.failure = "degenerate sample (all mass at one point)";
    return d;
  }
  const double common = m * (1.0 - m) / v - 1.0;
  if (!(common > 0.0)) {
    d.failure = "sample variance too large for a Beta law";
    return d;
  }
  d.alpha = m * common;
  d.beta = (1.0 - m) * common;
  const double N = static_cast<double>(sample.size());
  const double hw = stats::student_t_quantile(0.975, N - 1.0) * std::sqrt(v / N);
  const double lo = std::max(m - hw, 1e-12);
  const double hi = std::min(m + hw, 1.0 - 1e-12);
  d.ratio = {m / (1.0 - m), lo / (1.0 - lo), hi / (1.0 - hi)};
  std::vector<double> s(sample.begin(), sample.end());
  const double a = d.alpha;
  const double b = d.beta;
  std::sort(s.begin(), s.end());
  d.sample = s;
  d.ks = stats::ks_statistic(std::move(s), [a, b](double u) { return stats::beta_cdf(a, b, u); });
  d.ks_critical = stats::ks_critical_1pct(sample.size());
  d.ks_pvalue = stats::ks_pvalue(d.ks, sample.size());
  d.ok = true;
  return d;
}

BetaDiagnostic beta_diagnostic(const NetworkModel& model, std::span<const double> x0, double t_end,
                               std::size_t replicas, std::uint64_t seed) {
  if (model.size() != 2) throw UnsupportedModel("the share diagnostic needs a two-patch model");
  if (!has_multiplicative_structure(model)) throw UnsupportedModel("the share diagnostic needs a multiplicative model");
  double csum = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto* c = std::get_if<ConstantGrowth>(&model.growth(i));
    if (!c) throw UnsupportedModel("the share diagnostic needs constant growth");
    csum += c->c;
  }
  if (csum < 0.0) throw UnsupportedModel("the share diagnostic needs c_1 + c_2 >= 0");
  const double t12 = std::get<ConstantRate>(model.transfer({0, 1}).rate).theta;
  const double t21 = std::get<ConstantRate>(model.transfer({1, 0}).rate).theta;
  const State s0{std::vector<double>(x0.begin(), x0.end()), 0.0};
  std::vector<double> share;
  share.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    SimulationOptions opt;
    opt.stream = r;
    opt.record_events = false;
    const auto x = simulate(model, s0, t_end, seed, opt).x_end;
    const double tot = x[0] + x[1];
    share.push_back(tot > 0.0 ? x[0] / tot : 0.5);
  }
  return fit_beta(share, t21 / t12);
}

GrowthSlope total_growth_slope(const NetworkModel& model, std::span<const double> x0, double t_from, double t_end,
                               double step, std::size_t replicas, std::uint64_t seed) {
  if (!(t_end > t_from) || !(t_from >= 0.0) || !(step > 0.0)) throw ContractViolation("bad regression window");
  const State s0{std::vector<double>(x0.begin(), x0.end()), 0.0};
  std::vector<double> ts;
  std::vector<double> totals;
  for (std::size_t r = 0; r < replicas; ++r) {
    SimulationOptions opt;
    opt.stream = r;
    opt.record_events = false;
    opt.sample_step = step;
    const auto traj = simulate(model, s0, t_end, seed, opt);
    std::size_t k = 0;
    for (const auto& s : traj.samples) {
      if (s.t < t_from) continue;
      if (r == 0) {
        ts.push_back(s.t);
        totals.push_back(0.0);
      }
      totals[k++] += std::accumulate(s.x.begin(), s.x.end(), 0.0) / static_cast<double>(replicas);
    }
  }
  GrowthSlope out;
  out.fit = stats::linear_regression(ts, totals);
  out.t = ts;
  out.mean_total = totals;
  for (std::size_t i = 0; i < model.size(); ++i) out.expected += growth_limit(model.growth(i));
  return out;
}

ScalingTrend scaling_trend(const NetworkModel& model, std::span<const double> s0, std::span<const double> R_values,
                           std::size_t seeds, std::uint64_t seed) {
  if (seeds == 0) throw ContractViolation("seeds must be >= 1");
  ScalingTrend out;
  for (double R : R_values) {
    double acc = 0.0;
    for (std::size_t k = 0; k < seeds; ++k) acc += scaling_gap(model, s0, R, seed, k);
    out.R.push_back(R);
    out.mean_gap.push_back(acc / static_cast<double>(seeds));
  }
  out.decreasing = true;
  for (std::size_t k = 1; k < out.mean_gap.size(); ++k) {
    if (!(out.mean_gap[k] < out.mean_gap[k - 1])) out.decreasing = false;
  }
  return out;
}

}  // namespace pdmp
