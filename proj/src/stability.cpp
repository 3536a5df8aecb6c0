#include "pdmp/stability.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "pdmp/errors.hpp"
#include "pdmp/flow.hpp"
#include "pdmp/sim.hpp"

namespace pdmp {

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency forward_graph(const NetworkModel& model) {
  Adjacency adj(model.size());
  for (const Edge e : model.active_edges()) adj[e.from].push_back(e.to);
  return adj;  // sorted: active_edges() is sorted
}

Adjacency reverse_graph(const NetworkModel& model) {
  Adjacency adj(model.size());
  for (const Edge e : model.active_edges()) adj[e.to].push_back(e.from);
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

std::vector<std::size_t> bfs(const Adjacency& adj, std::span<const std::size_t> sources) {
  std::vector<std::size_t> dist(adj.size(), kUnreachable);
  std::deque<std::size_t> queue;
  for (std::size_t s : sources) {
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : adj[u]) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<std::size_t> patches_of(const NetworkModel& model, PatchClass cls) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (model.patch_class(i) == cls) out.push_back(i);
  }
  return out;
}

std::string patch_label(std::size_t i) { return "patch " + std::to_string(i + 1); }

// Shortest active path from `from` to `to` with at least one edge; smallest
// predecessor wins ties.
std::optional<std::vector<Edge>> shortest_path(const Adjacency& adj, std::size_t from, std::size_t to) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> parent(n, kUnreachable);
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t v : adj[from]) {
    if (!seen[v]) {
      seen[v] = true;
      parent[v] = from;
      queue.push_back(v);
    }
  }
  while (!queue.empty() && !seen[to]) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        parent[v] = u;
        queue.push_back(v);
      }
    }
  }
  if (!seen[to]) return std::nullopt;
  std::vector<Edge> path;
  std::size_t v = to;
  do {
    path.push_back({parent[v], v});
    v = parent[v];
  } while (v != from);
  std::reverse(path.begin(), path.end());
  return path;
}

bool all_constant_growth(const NetworkModel& model) {
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (!std::holds_alternative<ConstantGrowth>(model.growth(i))) return false;
  }
  return true;
}

// Minimal proper subsets closed under active edges: mass there never leaves.
std::vector<std::vector<std::size_t>> closed_subsets(const NetworkModel& model) {
  const auto fwd = forward_graph(model);
  const std::size_t n = model.size();
  std::vector<std::vector<std::size_t>> out;
  std::vector<bool> covered(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (covered[i]) continue;
    const std::size_t start[] = {i};
    const auto dist = bfs(fwd, start);
    std::vector<std::size_t> reach;
    for (std::size_t j = 0; j < n; ++j) {
      if (dist[j] != kUnreachable) reach.push_back(j);
    }
    if (reach.size() == n) continue;
    bool minimal = true;
    for (const auto& s : out) {
      if (std::includes(reach.begin(), reach.end(), s.begin(), s.end())) minimal = false;
    }
    if (!minimal) continue;
    for (std::size_t j : reach) covered[j] = true;
    out.push_back(reach);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

AssumptionReport check_assumptions(const NetworkModel& model) {
  AssumptionReport rep;
  const auto validation = validate_model(model);
  for (const auto& issue : validation.issues) {
    const bool about_growth = issue.where.rfind("patch", 0) == 0 || issue.kind == IssueKind::GrowthBound;
    if (issue.kind == IssueKind::AssumptionA || issue.kind == IssueKind::Layout ||
        issue.kind == IssueKind::GrowthBound || (issue.kind == IssueKind::Structural && about_growth)) {
      rep.a.pass = false;
      rep.a.reasons.push_back(issue.where + ": " + issue.message);
    }
  }

  // finite drain of sinks from a compact set of probe levels
  const std::vector<double> levels{1.0, 10.0, 100.0};
  for (std::size_t i : patches_of(model, PatchClass::Sink)) {
    std::vector<double> x(model.size(), 0.0);
    bool asymptotic = !std::holds_alternative<ConstantGrowth>(model.growth(i));
    for (double y : levels) {
      x[i] = y;
      const double t = drain_time(model, x, i);
      if (!std::isfinite(t)) {
        rep.a.pass = false;
        rep.a.reasons.push_back(patch_label(i) + ": sink does not drain from level " + std::to_string(y));
        asymptotic = false;
        break;
      }
    }
    if (asymptotic) {
      rep.a.notes.push_back(patch_label(i) + ": sink drains only asymptotically; drain declared below " +
                            std::to_string(kDrainThreshold));
    }
  }

  const auto sinks = patches_of(model, PatchClass::Sink);
  const auto fwd = forward_graph(model);
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (sinks.empty()) break;
    // every sink from every patch, not just the nearest one
    const std::size_t start[] = {i};
    const auto dist = bfs(fwd, start);
    for (std::size_t s : sinks) {
      if (dist[s] == kUnreachable) {
        rep.b.pass = false;
        rep.b.reasons.push_back("sink " + std::to_string(s + 1) + " unreachable from " + patch_label(i));
      }
    }
  }
  const auto sources = patches_of(model, PatchClass::Source);
  const auto from_sources = bfs(fwd, sources);
  for (std::size_t i : patches_of(model, PatchClass::Neutral)) {
    if (from_sources[i] == kUnreachable) {
      rep.b.pass = false;
      rep.b.reasons.push_back("neutral " + patch_label(i) + " unreachable from every source");
    }
  }
  if (sinks.empty()) rep.b.notes.push_back("no sink: reachability of sinks holds vacuously");
  return rep;
}

std::vector<std::size_t> sink_distances(const NetworkModel& model) {
  return bfs(reverse_graph(model), patches_of(model, PatchClass::Sink));
}

bool strongly_connected(const NetworkModel& model) {
  if (model.size() == 0) return true;
  const std::size_t start[] = {0};
  const auto f = bfs(forward_graph(model), start);
  const auto r = bfs(reverse_graph(model), start);
  return std::none_of(f.begin(), f.end(), [](std::size_t d) { return d == kUnreachable; }) &&
         std::none_of(r.begin(), r.end(), [](std::size_t d) { return d == kUnreachable; });
}

bool weakly_connected(const NetworkModel& model) {
  if (model.size() == 0) return true;
  Adjacency und(model.size());
  for (const Edge e : model.active_edges()) {
    und[e.from].push_back(e.to);
    und[e.to].push_back(e.from);
  }
  const std::size_t start[] = {0};
  const auto d = bfs(und, start);
  return std::none_of(d.begin(), d.end(), [](std::size_t v) { return v == kUnreachable; });
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Ergodic: return "Ergodic";
    case Classification::Transient: return "Transient";
    case Classification::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Multiplicative: return "multiplicative";
    case Family::Unitary: return "unitary";
    case Family::Other: return "other";
  }
  return "?";
}

TrafficResult traffic_condition(const NetworkModel& model) {
  if (!all_constant_growth(model)) throw UnsupportedModel("traffic condition needs constant growth in every patch");
  TrafficResult r;
  bool any_nonzero = false;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double c = std::get<ConstantGrowth>(model.growth(i)).c;
    r.sum += c;
    any_nonzero = any_nonzero || c != 0.0;
  }
  if (!any_nonzero) throw ModelValidationError("constant growth rates must not all be zero");
  r.verdict = r.sum < 0.0 ? Classification::Ergodic : Classification::Transient;
  return r;
}

std::vector<DriftProbe> drift_limit_probe(const NetworkModel& model, std::span<const std::size_t> subset,
                                          std::span<const double> R_values) {
  for (std::size_t k = 0; k < R_values.size(); ++k) {
    if (!(R_values[k] > 0.0) || (k > 0 && !(R_values[k] > R_values[k - 1]))) {
      throw ContractViolation("probe levels must be positive and increasing");
    }
  }
  std::vector<bool> in(model.size(), false);
  for (std::size_t i : subset) {
    if (i >= model.size()) throw ContractViolation("probe subset index out of range");
    in[i] = true;
  }
  std::vector<DriftProbe> out;
  for (double R : R_values) {
    double sup = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      const auto& g = model.growth(i);
      const double best = in[i] ? std::max({growth_value(g, R), growth_value(g, 2 * R), growth_value(g, 4 * R)})
                                : std::max(growth_value(g, 0.0), growth_value(g, R));
      sup += best;
    }
    out.push_back({R, sup});
  }
  return out;
}

double drift_limit(const NetworkModel& model, std::span<const std::size_t> subset) {
  std::vector<bool> in(model.size(), false);
  for (std::size_t i : subset) in.at(i) = true;
  double s = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    s += in[i] ? growth_limit(model.growth(i)) : growth_sup(model.growth(i), 0.0);
  }
  return s;
}

std::vector<Edge> construct_exit_edges(const NetworkModel& model) {
  const auto rep = check_assumptions(model);
  if (!rep.b.pass) {
    std::string why;
    for (const auto& r : rep.b.reasons) why += "\n  " + r;
    throw ModelValidationError("no exit edges: graph topology check fails" + why);
  }
  const auto d = sink_distances(model);
  const auto fwd = forward_graph(model);
  std::vector<Edge> kappa;
  for (std::size_t l = 0; l < model.size(); ++l) {
    if (model.patch_class(l) == PatchClass::Sink) continue;
    if (d[l] == kUnreachable) throw ModelValidationError("no exit edges: " + patch_label(l) + " cannot reach a sink");
    const auto it = std::find_if(fwd[l].begin(), fwd[l].end(), [&](std::size_t j) { return d[j] < d[l]; });
    if (it == fwd[l].end()) throw InternalError("no descending edge out of " + patch_label(l));
    kappa.push_back({l, *it});
  }
  return kappa;
}

SinkCycle construct_sink_cycle(const NetworkModel& model) {
  SinkCycle out;
  const auto sinks = patches_of(model, PatchClass::Sink);
  if (sinks.empty()) {
    out.reason = "model has no sink";
    return out;
  }
  const auto fwd = forward_graph(model);
  for (std::size_t k = 0; k < sinks.size(); ++k) {
    const std::size_t from = sinks[k];
    const std::size_t to = sinks[(k + 1) % sinks.size()];
    const auto path = shortest_path(fwd, from, to);
    if (!path) {
      out.edges.clear();
      out.reason = "no active path from sink " + std::to_string(from + 1) + " to sink " + std::to_string(to + 1);
      return out;
    }
    out.edges.insert(out.edges.end(), path->begin(), path->end());
  }
  out.found = true;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<double>> start_grid(std::size_t n, double R) {
  std::vector<std::vector<double>> out;
  const double base = R > 0.0 ? R : 1.0;
  for (double L : {base, 2.0 * base}) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(n, 0.0);
      x[i] = L;
      out.push_back(x);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        std::vector<double> x(n, 0.0);
        x[i] = 0.5 * L;
        x[j] = 0.5 * L;
        out.push_back(x);
      }
    }
    if (n > 2) out.push_back(std::vector<double>(n, L / static_cast<double>(n)));
  }
  return out;
}

}  // namespace

Assumption2Estimate estimate_assumption2(const NetworkModel& model, const Assumption2Params& p) {
  if (!p.S.is_region() || !p.S_prime.is_region()) {
    throw ContractViolation("S and S' must be conjunctions of min(...) >= r and sum >= r");
  }
  if (p.replicas == 0) throw ContractViolation("replicas must be >= 1");
  if (!(p.T > 0.0) || !(p.T_prime > 0.0) || !(p.R >= 0.0)) throw ContractViolation("T, T' must be > 0 and R >= 0");
  require_simulable(model);
  const std::size_t n = model.size();

  Assumption2Estimate est;
  const auto grid = start_grid(n, p.R);
  std::vector<const std::vector<double>*> outside;
  std::vector<const std::vector<double>*> inner;
  for (const auto& x : grid) {
    if (p.S_prime(x) && !p.S(x)) throw ContractViolation("S' must be contained in S");
    if (!p.S(x)) outside.push_back(&x);
    if (p.S_prime(x)) inner.push_back(&x);
  }
  est.delta_states = outside.size();
  est.eps_states = inner.size();

  std::uint64_t stream = 0;
  auto run = [&](const std::vector<double>& x0, double horizon, auto&& segment_ok, bool want_any) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < p.replicas; ++r) {
      bool any = false;
      bool all = true;
      SimulationOptions opt;
      opt.stream = stream++;
      opt.record_events = false;
      opt.on_segment = [&](double t0, std::span<const double> xs, double t1) {
        const bool ok = segment_ok(xs, t1 - t0);
        any = any || ok;
        all = all && ok;
      };
      simulate(model, State{x0, 0.0}, horizon, p.seed, opt);
      if (want_any ? any : all) ++hits;
    }
    return stats::wilson(hits, p.replicas);
  };

  est.delta = {1.0, 1.0, 1.0};
  if (outside.empty()) est.notes.push_back("no start state outside S: hitting bound holds vacuously");
  for (const auto* x : outside) {
    const auto iv = run(
        *x, p.T,
        [&](std::span<const double> xs, double dt) { return segment_first_entry(model, xs, dt, p.S_prime).has_value(); },
        true);
    if (iv.estimate < est.delta.estimate) est.delta = iv;
  }

  est.eps = {1.0, 1.0, 1.0};
  if (inner.empty()) est.notes.push_back("no start state in S': sojourn bound holds vacuously");
  for (const auto* x : inner) {
    const auto iv = run(
        *x, p.T_prime,
        [&](std::span<const double> xs, double dt) {
          const double in = segment_time_in_set(model, xs, dt, p.S);
          return in >= dt * (1.0 - 1e-12) && p.S(xs);
        },
        false);
    if (iv.estimate < est.eps.estimate) est.eps = iv;
  }

  // sup of the separable Σφ over S: each coordinate bounded below by its min-atoms
  std::vector<double> lower(n, 0.0);
  for (const Atom& a : p.S.atoms()) {
    if (a.agg != Aggregate::Min) continue;
    if (a.patches.empty()) {
      for (double& l : lower) l = std::max(l, a.value);
    } else {
      for (std::size_t i : a.patches) lower[i] = std::max(lower[i], a.value);
    }
  }
  double sup_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sup_s += growth_sup(model.growth(i), lower[i]);
    est.sup_growth += growth_sup(model.growth(i), 0.0);
  }
  est.c = -sup_s;
  if (!(est.c > 0.0)) est.notes.push_back("sum of growth is not bounded away from 0 below on S (c <= 0)");

  const double d = est.delta.estimate;
  const double e = est.eps.estimate;
  est.lhs = e * p.T_prime * est.c;
  if (d <= 0.0) {
    est.rhs = std::numeric_limits<double>::infinity();
    est.holds = false;
    est.notes.push_back("no replica reached S' from some start state (delta = 0)");
  } else {
    est.rhs = (1.0 - e) * (p.T / d) * est.sup_growth;
    est.holds = est.c > 0.0 && est.lhs > est.rhs;
  }
  return est;
}

Family detect_family(const NetworkModel& model) {
  const auto live = model.live_edges();
  if (live.empty()) return Family::Other;
  const bool mult = std::all_of(live.begin(), live.end(), [&](Edge e) {
    const auto& t = model.transfer(e);
    return std::holds_alternative<ConstantRate>(t.rate) && is_relative(t.amplitude);
  });
  if (mult) return Family::Multiplicative;
  const bool coercive = std::all_of(live.begin(), live.end(), [&](Edge e) {
    const auto& r = model.transfer(e).rate;
    return std::holds_alternative<PowerLawRate>(r) || std::holds_alternative<CoerciveRate>(r);
  });
  const bool unit = std::all_of(model.active_edges().begin(), model.active_edges().end(), [&](Edge e) {
    return std::holds_alternative<UnitDirac>(model.transfer(e).amplitude);
  });
  if (coercive && unit) return Family::Unitary;
  return Family::Other;
}

StabilityReport classify(const NetworkModel& model) {
  StabilityReport rep;
  rep.assumptions = check_assumptions(model);
  rep.family = detect_family(model);
  rep.constant_growth = all_constant_growth(model);
  rep.strongly_connected = strongly_connected(model);
  rep.weakly_connected = weakly_connected(model);

  std::vector<std::size_t> all(model.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto sinks = patches_of(model, PatchClass::Sink);
  rep.drift_all = drift_limit(model, all);
  if (!sinks.empty()) rep.drift_sinks = drift_limit(model, sinks);
  const double levels[] = {10.0, 100.0, 1000.0};
  rep.drift_probe = drift_limit_probe(model, all, levels);

  if (rep.constant_growth) {
    try {
      rep.traffic_sum = traffic_condition(model).sum;
    } catch (const ModelValidationError& e) {
      rep.notes.push_back(e.what());
    }
  }

  const auto validation = validate_model(model);
  if (validation.blocks_simulation()) {
    rep.cited_condition = "model validation";
    rep.notes.push_back("model is not well defined:\n" + validation.summary());
    return rep;
  }
  if (!rep.assumptions.a.pass || !rep.assumptions.b.pass) {
    rep.cited_condition = !rep.assumptions.a.pass ? "growth assumptions fail" : "topology assumptions fail";
    if (!rep.assumptions.b.pass && rep.constant_growth) {
      for (const auto& set : closed_subsets(model)) {
        double c = 0.0;
        std::ostringstream os;
        for (std::size_t k = 0; k < set.size(); ++k) {
          os << (k ? "," : "") << set[k] + 1;
          c += std::get<ConstantGrowth>(model.growth(set[k])).c;
        }
        rep.notes.push_back("patches {" + os.str() + "} form a closed set with growth sum " + std::to_string(c) +
                            (c >= 0.0 ? ", transient on its own" : ""));
      }
    }
    return rep;
  }
  if (rep.family == Family::Other) {
    rep.cited_condition = "outside the multiplicative and unitary families";
    return rep;
  }

  if (rep.constant_growth && rep.traffic_sum) {
    rep.classification = *rep.traffic_sum < 0.0 ? Classification::Ergodic : Classification::Transient;
    rep.cited_condition = std::string("traffic condition (sum of c_i < 0), ") + std::string(to_string(rep.family)) +
                          " family";
    return rep;
  }

  if (rep.family == Family::Multiplicative) {
    if (rep.drift_all < 0.0) {
      rep.classification = Classification::Ergodic;
      rep.cited_condition = "multiplicative drift condition (limsup of sum phi as min_i x_i grows < 0)";
    } else {
      rep.cited_condition = "multiplicative drift condition not met";
    }
    return rep;
  }

  if (rep.drift_sinks && *rep.drift_sinks < 0.0) {
    rep.classification = Classification::Ergodic;
    rep.cited_condition = "unitary sink drift condition (limsup of sum phi as min over sinks grows < 0)";
  } else if (rep.weakly_connected && rep.drift_all < 0.0) {
    rep.classification = Classification::Ergodic;
    rep.cited_condition = "unitary connected drift condition (connected graph, limsup of sum phi < 0)";
    if (!rep.strongly_connected) rep.notes.push_back("graph is weakly but not strongly connected");
  } else {
    rep.cited_condition = "unitary drift conditions not met";
  }
  return rep;
}

}  // namespace pdmp
