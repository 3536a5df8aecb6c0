#include "pdmp/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pdmp/builtins.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/model_io.hpp"
#include "pdmp/sim.hpp"
#include "pdmp/trajectory_io.hpp"

namespace pdmp {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kExperiments = {"simulate", "classify",  "occupancy",  "stationary",
                                            "drift-walk", "beta", "assumption2"};

// The long occupancy path runs on a stream no ensemble replica uses.
constexpr std::uint64_t kPathStream = std::uint64_t{1} << 32;

ordered_json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json jvec(std::span<const double> v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

ordered_json jinterval(const stats::Interval& i) {
  return {{"estimate", jnum(i.estimate)}, {"lo", jnum(i.lo)}, {"hi", jnum(i.hi)}};
}

ordered_json jbatch(const stats::BatchEstimate& b) {
  return {{"mean", jnum(b.mean)}, {"half_width", jnum(b.half_width)}, {"std_error", jnum(b.std_error)},
          {"batches", b.batches}};
}

ordered_json jcheck(const CheckResult& c) {
  return {{"pass", c.pass}, {"reasons", c.reasons}, {"notes", c.notes}};
}

ordered_json jedges(const std::vector<Edge>& es) {
  ordered_json a = ordered_json::array();
  for (const Edge e : es) a.push_back({e.from + 1, e.to + 1});
  return a;
}

// Plot data: header line, column names, tab-separated rows.
class Table {
 public:
  explicit Table(std::vector<std::string> cols) {
    os_ << "# pdmpnet-plot v1\n";
    for (std::size_t k = 0; k < cols.size(); ++k) os_ << (k ? "\t" : "") << cols[k];
    os_ << "\n";
  }
  void row(std::initializer_list<double> vals) { row(std::vector<double>(vals)); }
  void row(const std::vector<double>& vals) {
    char buf[32];
    for (std::size_t k = 0; k < vals.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
      os_ << (k ? "\t" : "") << buf;
    }
    os_ << "\n";
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

// ---------------------------------------------------------------------------
// Schema helpers

double get_number(const json& j, const char* key) {
  if (!j.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string("'") + key + "' must be finite");
  return v;
}

std::uint64_t get_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const char* key) {
  if (!j.at(key).is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

NetworkModel load_model(const json& m, const fs::path& base, std::string& source) {
  if (m.is_string()) {
    source = m.get<std::string>();
    return make_builtin(source);
  }
  if (!m.is_object()) throw ConfigError("'model' must be a built-in name or an object");
  if (m.contains("builtin")) {
    only_keys(m, "model", {"builtin", "params"});
    source = get_string(m, "builtin");
    return make_builtin(source, m.contains("params") ? m.at("params") : json::object());
  }
  if (m.contains("file")) {
    only_keys(m, "model", {"file"});
    const fs::path p = base / get_string(m, "file");
    source = p.filename().string();
    return read_model_file(p);
  }
  source = "inline";
  return model_from_json(m);
}

void require(const json& j, const std::string& experiment, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (!j.contains(k)) throw ConfigError("experiment '" + experiment + "' needs '" + k + "'");
  }
}

// ---------------------------------------------------------------------------
// Experiments

ordered_json header(const Scenario& s) {
  ordered_json r;
  r["format_version"] = kScenarioFormatVersion;
  r["experiment"] = s.experiment;
  r["scenario"] = s.label;
  r["model"] = s.model_source;
  r["patches"] = s.model.size();
  return r;
}

ordered_json validation_json(const NetworkModel& model) {
  ordered_json a = ordered_json::array();
  for (const auto& i : validate_model(model).issues) {
    a.push_back({{"kind", std::string(to_string(i.kind))}, {"where", i.where}, {"message", i.message}});
  }
  return a;
}

std::string traj_name(std::size_t r) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "trajectory_%04zu.csv", r + 1);
  return buf;
}

void run_simulate(const Scenario& s, ordered_json& rep, std::vector<OutputFile>& out) {
  rep["seed"] = s.seed;
  rep["replicas"] = s.replicas;
  rep["t_end"] = s.t_end;
  rep["x0"] = jvec(s.x0);
  ordered_json runs = ordered_json::array();
  std::vector<std::vector<double>> grid_sum;
  std::vector<double> grid_t;
  double total_events = 0.0;
  for (std::size_t r = 0; r < s.replicas; ++r) {
    SimulationOptions opt;
    opt.stream = r;
    opt.sample_step = s.sample_step;
    const auto traj = simulate(s.model, State{s.x0, 0.0}, s.t_end, s.seed, opt);
    out.push_back({traj_name(r), trajectory_to_string(traj)});
    runs.push_back({{"file", traj_name(r)}, {"stream", r}, {"events", traj.event_count}, {"x_end", jvec(traj.x_end)}});
    total_events += static_cast<double>(traj.event_count);
    if (r == 0) {
      for (const auto& smp : traj.samples) {
        grid_t.push_back(smp.t);
        grid_sum.emplace_back(s.model.size(), 0.0);
      }
    }
    for (std::size_t k = 0; k < traj.samples.size() && k < grid_sum.size(); ++k) {
      for (std::size_t i = 0; i < s.model.size(); ++i) grid_sum[k][i] += traj.samples[k].x[i];
    }
  }
  rep["mean_events"] = total_events / static_cast<double>(s.replicas);
  rep["runs"] = runs;
  if (!grid_t.empty()) {
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 0; i < s.model.size(); ++i) cols.push_back("mean_x" + std::to_string(i + 1));
    cols.push_back("mean_total");
    Table tab(cols);
    for (std::size_t k = 0; k < grid_t.size(); ++k) {
      std::vector<double> row{grid_t[k]};
      double tot = 0.0;
      for (double v : grid_sum[k]) {
        row.push_back(v / static_cast<double>(s.replicas));
        tot += v / static_cast<double>(s.replicas);
      }
      row.push_back(tot);
      tab.row(row);
    }
    out.push_back({"plot_means.tsv", tab.str()});
  }
}

void run_classify(const Scenario& s, ordered_json& rep, std::vector<OutputFile>& out) {
  const auto c = classify(s.model);
  rep["classification"] = std::string(to_string(c.classification));
  rep["cited_condition"] = c.cited_condition;
  rep["family"] = std::string(to_string(c.family));
  rep["constant_growth"] = c.constant_growth;
  rep["strongly_connected"] = c.strongly_connected;
  rep["weakly_connected"] = c.weakly_connected;
  rep["traffic_sum"] = c.traffic_sum ? jnum(*c.traffic_sum) : ordered_json(nullptr);
  rep["drift_all"] = jnum(c.drift_all);
  rep["drift_sinks"] = c.drift_sinks ? jnum(*c.drift_sinks) : ordered_json(nullptr);
  rep["assumption_a"] = jcheck(c.assumptions.a);
  rep["assumption_b"] = jcheck(c.assumptions.b);
  if (c.assumptions.b.pass) {
    rep["exit_edges"] = jedges(construct_exit_edges(s.model));
    const auto cyc = construct_sink_cycle(s.model);
    rep["sink_cycle"] = cyc.found ? jedges(cyc.edges) : ordered_json(cyc.reason);
  }
  rep["notes"] = c.notes;
  rep["validation"] = validation_json(s.model);
  Table tab({"R", "sup_sum_phi"});
  for (const auto& p : c.drift_probe) tab.row({p.R, p.sup});
  out.push_back({"plot_drift_probe.tsv", tab.str()});
}

// Feeds a stored path to a segment consumer.
template <class F>
void for_each_segment(const Trajectory& traj, F&& f) {
  for (std::size_t k = 0; k < traj.segment_count(); ++k) f(traj.segment_start(k), traj.segment_state(k), traj.segment_end(k));
}

void run_occupancy(const Scenario& s, ordered_json& rep, std::vector<OutputFile>& out) {
  const auto pred = Predicate::parse(s.predicate, s.model.size());
  rep["predicate"] = pred.to_string();
  rep["burn_in"] = s.burn_in;
  rep["batches"] = s.batches;
  Table tab({"path", "batch", "fraction"});
  if (!s.inputs.empty()) {
    ordered_json paths = ordered_json::array();
    std::vector<double> fracs;
    for (std::size_t k = 0; k < s.inputs.size(); ++k) {
      const auto& traj = s.inputs[k];
      OccupancyMeter meter(s.model, pred, s.burn_in * traj.t_end, s.batches, traj.t_end);
      for_each_segment(traj, [&](double t0, std::span<const double> x0, double t1) { meter(t0, x0, t1); });
      const auto bf = meter.batch_fractions();
      const auto est = stats::batch_estimate(bf);
      paths.push_back({{"file", s.trajectories[k].filename().string()}, {"t_end", traj.t_end},
                       {"fraction", jnum(occupancy(s.model, traj, pred, s.burn_in * traj.t_end))},
                       {"batch_ci", jbatch(est)}});
      fracs.push_back(meter.fraction());
      for (std::size_t b = 0; b < bf.size(); ++b) tab.row({double(k + 1), double(b + 1), bf[b]});
    }
    rep["paths"] = paths;
    rep["mean_fraction"] = jnum(stats::mean(fracs));
  } else {
    rep["seed"] = s.seed;
    rep["t_end"] = s.t_end;
    rep["x0"] = jvec(s.x0);
    OccupancyMeter meter(s.model, pred, s.burn_in * s.t_end, s.batches, s.t_end);
    SimulationOptions opt;
    opt.stream = kPathStream;
    opt.record_events = false;
    opt.on_segment = [&meter](double t0, std::span<const double> x0, double t1) { meter(t0, x0, t1); };
    const auto traj = simulate(s.model, State{s.x0, 0.0}, s.t_end, s.seed, opt);
    const auto bf = meter.batch_fractions();
    rep["time_occupancy"] = {{"fraction", jnum(meter.fraction())}, {"batch_ci", jbatch(stats::batch_estimate(bf))},
                             {"events", traj.event_count}, {"stream", kPathStream}};
    for (std::size_t b = 0; b < bf.size(); ++b) tab.row({1.0, double(b + 1), bf[b]});
    if (s.endpoint_t) {
      const auto e = endpoint_occupancy(s.model, s.x0, *s.endpoint_t, pred, s.replicas, s.seed);
      rep["endpoint_occupancy"] = {{"t", *s.endpoint_t}, {"replicas", e.replicas}, {"fraction", jinterval(e.fraction)}};
    }
  }
  if (const auto p = one_exit_occupancy(s.model)) {
    rep["one_exit_prediction"] = {{"predicate", "x" + std::to_string(s.model.size()) + " > 0"}, {"value", *p}};
  }
  out.push_back({"plot_batches.tsv", tab.str()});
}

std::vector<TestFunction> stationary_functions(std::size_t n) {
  std::vector<TestFunction> fs;
  for (std::size_t i = 0; i < n; ++i) fs.push_back(coordinate_function(i));
  fs.push_back(total_function());
  fs.push_back(coordinate_square_function(0));
  return fs;
}

ordered_json jestimates(const std::vector<StationaryEstimate>& es) {
  ordered_json a = ordered_json::array();
  for (const auto& e : es) {
    ordered_json o = jbatch(e.estimate);
    o.insert(o.begin(), {"label", e.label});
    a.push_back(o);
  }
  return a;
}

void run_stationary(const Scenario& s, ordered_json& rep, std::vector<OutputFile>& out) {
  std::vector<Trajectory> trajs = s.inputs;
  if (trajs.empty()) {
    rep["seed"] = s.seed;
    rep["replicas"] = s.replicas;
    rep["t_end"] = s.t_end;
    for (std::size_t r = 0; r < s.replicas; ++r) {
      SimulationOptions opt;
      opt.stream = r;
      trajs.push_back(simulate(s.model, State{s.x0, 0.0}, s.t_end, s.seed, opt));
    }
  } else {
    ordered_json files = ordered_json::array();
    for (const auto& p : s.trajectories) files.push_back(p.filename().string());
    rep["trajectories"] = files;
  }
  const auto fs = stationary_functions(s.model.size());
  const PathWindow w{s.burn_in, s.batches, 0.95};
  const auto st = stationary_residuals(s.model, trajs, fs, w);
  rep["burn_in"] = s.burn_in;
  rep["span"] = st.span;
  rep["generator_means"] = jestimates(st.generator_means);
  rep["balance"] = jestimates(st.balance);
  rep["means"] = jestimates(st.means);
  rep["debits"] = jestimates(st.debits);
  rep["warnings"] = st.warnings;

  if (s.model.name == "linear-restoring") {
    std::vector<double> a, m;
    for (std::size_t i = 0; i < s.model.size(); ++i) {
      a.push_back(std::get<AffineGrowth>(s.model.growth(i)).a);
      const auto law = relative_law(s.model.transfer({i, (i + 1) % s.model.size()}).amplitude);
      m.push_back(law ? law->mean() : 0.0);
    }
    const auto E = restoring_means(a, m);
    rep["restoring_means"] = {{"analytic", jvec(E)}, {"residual", jnum(restoring_residual(a, m, E))}};
  }
  Table tab({"patch", "mean", "half_width"});
  for (std::size_t i = 0; i < st.means.size(); ++i) {
    tab.row({double(i + 1), st.means[i].estimate.mean, st.means[i].estimate.half_width});
  }
  out.push_back({"plot_means.tsv", tab.str()});
}

void run_drift_walk(const Scenario& s, ordered_json& rep, std::vector<OutputFile>& out) {
  const auto& d = s.drift_walk;
  const auto& p = d.params;
  rep["seed"] = s.seed;
  rep["replicas"] = s.replicas;
  rep["params"] = {{"eps", p.eps}, {"delta", p.delta}, {"c", p.c}, {"T", p.T}, {"T_prime", p.T_prime}, {"M", p.M}};
  const auto g = gamma_rate(d.r, p);
  rep["r"] = d.r;
  rep["gamma"] = {{"in_domain", g.in_domain}, {"value", jnum(g.value)}, {"r_max", jnum(g.r_max)}, {"warnings", g.warnings}};
  rep["mean_increment_theory"] = drift_walk_mean_increment(p);
  if (!g.in_domain) return;
  const auto mc = martingale_check(p, d.r, s.replicas, d.steps, s.seed);
  rep["martingale"] = {{"steps", d.steps}, {"slope", jnum(mc.slope.slope)}, {"slope_se", jnum(mc.slope.slope_se)},
                       {"slope_z", jnum(mc.slope_z)}, {"mean_increment", jnum(mc.mean_increment)}};
  const auto hb = hitting_time_bound(p, d.r, d.y0, d.R, s.replicas, d.max_steps, s.seed);
  rep["hitting_bound"] = {{"y0", d.y0},          {"R", d.R},        {"lhs", jnum(hb.lhs)}, {"lhs_lower", jnum(hb.lhs_lower)},
                          {"rhs", jnum(hb.rhs)}, {"holds", hb.holds}, {"censored", hb.censored}};
  Table tab({"k", "mean", "std_error"});
  for (std::size_t k = 0; k < mc.means.size(); ++k) tab.row({double(k + 1), mc.means[k], mc.std_errors[k]});
  out.push_back({"plot_martingale.tsv", tab.str()});
  Table walk({"k", "y"});
  const auto y = drift_walk(p, d.y0, d.steps, s.seed, 2);
  for (std::size_t k = 0; k < y.size(); ++k) walk.row({double(k + 1), y[k]});
  out.push_back({"plot_walk.tsv", walk.str()});
}

void run_beta(const Scenario& s, ordered_json& rep, std::vector<OutputFile>& out) {
  rep["seed"] = s.seed;
  rep["replicas"] = s.replicas;
  rep["t_end"] = s.t_end;
  rep["x0"] = jvec(s.x0);
  const auto b = beta_diagnostic(s.model, s.x0, s.t_end, s.replicas, s.seed);
  rep["beta"] = {{"ok", b.ok},
                 {"failure", b.failure},
                 {"sample_mean", jnum(b.sample_mean)},
                 {"alpha", jnum(b.alpha)},
                 {"beta", jnum(b.beta)},
                 {"ratio", jinterval(b.ratio)},
                 {"expected_ratio", jnum(b.expected_ratio)},
                 {"ks", jnum(b.ks)},
                 {"ks_critical_1pct", jnum(b.ks_critical)},
                 {"ks_pvalue", jnum(b.ks_pvalue)}};
  const double t_from = s.t_from.value_or(0.5 * s.t_end);
  const double step = s.sample_step.value_or(s.t_end / 100.0);
  const auto g = total_growth_slope(s.model, s.x0, t_from, s.t_end, step, s.replicas, s.seed);
  rep["growth"] = {{"t_from", t_from}, {"step", step}, {"slope", jnum(g.fit.slope)},
                   {"slope_se", jnum(g.fit.slope_se)}, {"expected", jnum(g.expected)}};
  Table shares({"share", "empirical_cdf", "fitted_cdf"});
  for (std::size_t k = 0; k < b.sample.size(); ++k) {
    shares.row({b.sample[k], double(k + 1) / double(b.sample.size()),
                b.ok ? stats::beta_cdf(b.alpha, b.beta, b.sample[k]) : 0.0});
  }
  out.push_back({"plot_shares.tsv", shares.str()});
  Table tot({"t", "mean_total"});
  for (std::size_t k = 0; k < g.t.size(); ++k) tot.row({g.t[k], g.mean_total[k]});
  out.push_back({"plot_total.tsv", tot.str()});
}

void run_assumption2(const Scenario& s, ordered_json& rep, std::vector<OutputFile>&) {
  const auto& a = s.assumption2;
  Assumption2Params p;
  p.S = Predicate::parse(a.S, s.model.size());
  p.S_prime = Predicate::parse(a.S_prime, s.model.size());
  p.T = a.T;
  p.T_prime = a.T_prime;
  p.R = a.R;
  p.replicas = s.replicas;
  p.seed = s.seed;
  const auto e = estimate_assumption2(s.model, p);
  rep["seed"] = s.seed;
  rep["replicas"] = s.replicas;
  rep["S"] = p.S.to_string();
  rep["S_prime"] = p.S_prime.to_string();
  rep["T"] = a.T;
  rep["T_prime"] = a.T_prime;
  rep["R"] = a.R;
  rep["delta"] = jinterval(e.delta);
  rep["eps"] = jinterval(e.eps);
  rep["delta_states"] = e.delta_states;
  rep["eps_states"] = e.eps_states;
  rep["c"] = jnum(e.c);
  rep["sup_growth"] = jnum(e.sup_growth);
  rep["lhs"] = jnum(e.lhs);
  rep["rhs"] = jnum(e.rhs);
  rep["holds"] = e.holds;
  rep["notes"] = e.notes;
}

void flatten(const ordered_json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array() && std::any_of(j.begin(), j.end(), [](const auto& e) { return e.is_structured(); })) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "." + std::to_string(k + 1), os);
  } else if (j.is_string()) {
    os << prefix << "\t" << j.get<std::string>() << "\n";
  } else {
    os << prefix << "\t" << j.dump() << "\n";
  }
}

}  // namespace

std::string render_report(const ordered_json& report, ReportFormat format) {
  if (format == ReportFormat::Structured) return report.dump(2) + "\n";
  std::ostringstream os;
  os << "# pdmpnet-report v" << kScenarioFormatVersion << "\n";
  ordered_json body = report;
  body.erase("format_version");
  flatten(body, "", os);
  return os.str();
}

Scenario scenario_from_json(const json& j, const fs::path& base, const std::string& label, const Overrides& ov) {
  only_keys(j, "scenario",
            {"format_version", "experiment", "model", "x0", "t_end", "replicas", "seed", "sample_step", "predicate",
             "burn_in", "batches", "endpoint_t", "t_from", "trajectories", "drift_walk", "assumption2", "output"});
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != kScenarioFormatVersion) {
    throw ConfigError("scenario: 'format_version' must be " + std::to_string(kScenarioFormatVersion));
  }
  Scenario s;
  s.label = label;
  s.format = ov.format;
  if (!j.contains("experiment")) throw ConfigError("scenario: missing 'experiment'");
  s.experiment = get_string(j, "experiment");
  if (!kExperiments.count(s.experiment)) throw ConfigError("unknown experiment '" + s.experiment + "'");
  const auto& e = s.experiment;

  if (e == "drift-walk") {
    if (j.contains("model")) throw ConfigError("experiment 'drift-walk' takes no model");
    s.model_source = "-";
  } else {
    if (!j.contains("model")) throw ConfigError("experiment '" + e + "' needs 'model'");
    s.model = load_model(j.at("model"), base, s.model_source);
  }
  const std::size_t n = s.model.size();

  if (j.contains("trajectories")) {
    if (e != "occupancy" && e != "stationary") throw ConfigError("'trajectories' applies to occupancy and stationary");
    const auto& t = j.at("trajectories");
    std::vector<std::string> names;
    if (t.is_string()) {
      names.push_back(t.get<std::string>());
    } else if (t.is_array() && !t.empty()) {
      for (const auto& v : t) {
        if (!v.is_string()) throw ConfigError("'trajectories' must hold file names");
        names.push_back(v.get<std::string>());
      }
    } else {
      throw ConfigError("'trajectories' must be a file name or a non-empty list of them");
    }
    for (const auto& nm : names) {
      s.trajectories.push_back(base / nm);
      s.inputs.push_back(read_trajectory_file(s.trajectories.back().string()));
      if (s.inputs.back().dim() != n) throw ConfigError(nm + ": trajectory dimension does not match the model");
    }
  }

  const bool simulates = (e == "simulate" || e == "beta" || ((e == "occupancy" || e == "stationary") && s.inputs.empty()));
  if (simulates) require(j, e, {"x0", "t_end", "seed"});
  if (e == "occupancy") require(j, e, {"predicate"});
  if (e == "drift-walk") require(j, e, {"drift_walk", "seed"});
  if (e == "assumption2") require(j, e, {"assumption2", "seed"});

  if (j.contains("x0")) {
    const auto& x = j.at("x0");
    if (!x.is_array() || x.size() != n) throw ConfigError("'x0' must list one value per patch");
    for (const auto& v : x) {
      if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() < 0.0) {
        throw ConfigError("'x0' entries must be finite and >= 0");
      }
      s.x0.push_back(v.get<double>());
    }
  }
  if (j.contains("t_end")) s.t_end = get_number(j, "t_end");
  if (ov.t_end) s.t_end = *ov.t_end;
  if (j.contains("seed")) s.seed = get_count(j, "seed");
  if (ov.seed) s.seed = *ov.seed;
  if (j.contains("replicas")) s.replicas = get_count(j, "replicas");
  if (ov.replicas) s.replicas = *ov.replicas;
  if (j.contains("sample_step")) s.sample_step = get_number(j, "sample_step");
  if (j.contains("predicate")) s.predicate = get_string(j, "predicate");
  if (j.contains("burn_in")) s.burn_in = get_number(j, "burn_in");
  if (j.contains("batches")) s.batches = get_count(j, "batches");
  if (j.contains("endpoint_t")) s.endpoint_t = get_number(j, "endpoint_t");
  if (j.contains("t_from")) s.t_from = get_number(j, "t_from");

  if (simulates && !(s.t_end > 0.0)) throw ConfigError("'t_end' must be > 0");
  if (s.replicas == 0) throw ConfigError("'replicas' must be >= 1");
  if ((e == "drift-walk" || e == "beta") && s.replicas < 3) throw ConfigError("experiment '" + e + "' needs replicas >= 3");
  if (s.sample_step && !(*s.sample_step > 0.0)) throw ConfigError("'sample_step' must be > 0");
  if (!(s.burn_in >= 0.0 && s.burn_in < 1.0)) throw ConfigError("'burn_in' must lie in [0, 1)");
  if (s.batches < 2) throw ConfigError("'batches' must be >= 2");
  if (s.endpoint_t && !(*s.endpoint_t > 0.0)) throw ConfigError("'endpoint_t' must be > 0");
  if (s.t_from && !(*s.t_from >= 0.0 && *s.t_from < s.t_end)) throw ConfigError("'t_from' must lie in [0, t_end)");
  if (e == "occupancy") Predicate::parse(s.predicate, n);

  if (j.contains("drift_walk")) {
    const auto& d = j.at("drift_walk");
    only_keys(d, "drift_walk", {"eps", "delta", "c", "T", "T_prime", "M", "r", "y0", "R", "steps", "max_steps"});
    auto& w = s.drift_walk;
    if (d.contains("eps")) w.params.eps = get_number(d, "eps");
    if (d.contains("delta")) w.params.delta = get_number(d, "delta");
    if (d.contains("c")) w.params.c = get_number(d, "c");
    if (d.contains("T")) w.params.T = get_number(d, "T");
    if (d.contains("T_prime")) w.params.T_prime = get_number(d, "T_prime");
    if (d.contains("M")) w.params.M = get_number(d, "M");
    if (d.contains("r")) w.r = get_number(d, "r");
    if (d.contains("y0")) w.y0 = get_number(d, "y0");
    if (d.contains("R")) w.R = get_number(d, "R");
    if (d.contains("steps")) w.steps = get_count(d, "steps");
    if (d.contains("max_steps")) w.max_steps = get_count(d, "max_steps");
    try {
      validate(w.params);
    } catch (const ContractViolation& ex) {
      throw ConfigError(std::string("drift_walk: ") + ex.what());
    }
    if (w.steps < 3) throw ConfigError("drift_walk: 'steps' must be >= 3");
  }
  if (j.contains("assumption2")) {
    const auto& a = j.at("assumption2");
    only_keys(a, "assumption2", {"S", "S_prime", "T", "T_prime", "R"});
    auto& w = s.assumption2;
    if (a.contains("S")) w.S = get_string(a, "S");
    if (a.contains("S_prime")) w.S_prime = get_string(a, "S_prime");
    if (a.contains("T")) w.T = get_number(a, "T");
    if (a.contains("T_prime")) w.T_prime = get_number(a, "T_prime");
    if (a.contains("R")) w.R = get_number(a, "R");
    const auto S = Predicate::parse(w.S, n);
    const auto Sp = Predicate::parse(w.S_prime, n);
    if (!S.is_region() || !Sp.is_region()) {
      throw ConfigError("assumption2: S and S_prime must be built from min(...) >= r or sum >= r atoms");
    }
    if (!(w.T > 0.0) || !(w.T_prime > 0.0) || !(w.R >= 0.0)) {
      throw ConfigError("assumption2: T, T_prime must be > 0 and R >= 0");
    }
  }

  if (ov.out) {
    s.out_dir = *ov.out;
  } else if (j.contains("output")) {
    s.out_dir = base / get_string(j, "output");
  } else if (const char* root = std::getenv(kOutRootEnv); root && *root) {
    s.out_dir = fs::path(root) / label;
  } else {
    s.out_dir = fs::path("pdmpnet-out") / label;
  }

  if (e != "classify" && e != "drift-walk") require_simulable(s.model);
  return s;
}

Scenario load_scenario(const fs::path& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return scenario_from_json(j, path.parent_path(), path.stem().string(), ov);
}

std::vector<OutputFile> execute(const Scenario& s) {
  std::vector<OutputFile> out;
  ordered_json rep = header(s);
  if (s.experiment == "simulate") run_simulate(s, rep, out);
  else if (s.experiment == "classify") run_classify(s, rep, out);
  else if (s.experiment == "occupancy") run_occupancy(s, rep, out);
  else if (s.experiment == "stationary") run_stationary(s, rep, out);
  else if (s.experiment == "drift-walk") run_drift_walk(s, rep, out);
  else if (s.experiment == "beta") run_beta(s, rep, out);
  else if (s.experiment == "assumption2") run_assumption2(s, rep, out);
  else throw InternalError("experiment dispatch");
  const bool structured = s.format == ReportFormat::Structured;
  out.insert(out.begin(), {structured ? "report.json" : "report.tsv", render_report(rep, s.format)});
  return out;
}

void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
  std::vector<fs::path> written;
  for (const auto& f : files) {
    const auto p = dir / f.name;
    std::ofstream os(p, std::ios::binary);
    if (os) os << f.content;
    if (os) os.flush();
    if (!os) {
      for (const auto& w : written) fs::remove(w, ec);
      fs::remove(p, ec);
      throw ConfigError("cannot write " + p.string());
    }
    written.push_back(p);
  }
}

int run_scenario(const fs::path& path, const Overrides& ov, std::ostream& err) {
  Scenario s;
  try {
    s = load_scenario(path, ov);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const ModelValidationError& ex) {
    err << "model validation failed: " << ex.what() << "\n";
    return kExitValidation;
  }
  std::vector<OutputFile> files;
  try {
    files = execute(s);
  } catch (const UnsupportedModel& ex) {
    err << "model validation failed: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const ModelValidationError& ex) {
    err << "model validation failed: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    err << "runtime failure: " << ex.what() << "\n";
    return kExitRuntime;
  }
  try {
    write_outputs(s.out_dir, files);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace pdmp
