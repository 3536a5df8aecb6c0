#include "pdmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double tabulated_value(const TabulatedGrowth& g, double y) {
  const auto& k = g.knots;
  const auto& v = g.values;
  if (k.empty()) return 0.0;
  if (y <= k.front()) return v.front();
  if (y >= k.back()) return v.back();
  const auto it = std::upper_bound(k.begin(), k.end(), y);
  const auto hi = static_cast<std::size_t>(it - k.begin());
  const std::size_t lo = hi - 1;
  const double w = (y - k[lo]) / (k[hi] - k[lo]);
  return v[lo] + w * (v[hi] - v[lo]);
}

// Probe levels for the grid-based checks.
constexpr double kProbeLevels[] = {0.0, 1e-3, 0.25, 0.5, 1.0, 2.0, 10.0, 100.0, 1e4};

}  // namespace

std::string_view to_string(PatchClass c) {
  switch (c) {
    case PatchClass::Source: return "source";
    case PatchClass::Neutral: return "neutral";
    case PatchClass::Sink: return "sink";
  }
  return "?";
}

std::string_view to_string(IssueKind k) {
  switch (k) {
    case IssueKind::Structural: return "structural";
    case IssueKind::Layout: return "layout";
    case IssueKind::AssumptionA: return "assumption-A";
    case IssueKind::ActiveGraph: return "active-graph";
    case IssueKind::RateShape: return "rate-shape";
    case IssueKind::AmplitudeLaw: return "amplitude-law";
    case IssueKind::GrowthBound: return "growth-bound";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Growth

double growth_value(const Growth& g, double y) {
  return std::visit(
      Overloaded{
          [y](const ConstantGrowth& c) { return c.c >= 0.0 || y > 0.0 ? c.c : 0.0; },
          [y](const LogisticGrowth& l) { return l.alpha * y * std::max(l.beta - y, 0.0) + l.c; },
          [y](const SinkReleaseGrowth& s) { return -s.c * y / (s.alpha + y); },
          [y](const AffineGrowth& a) { return a.a - a.b * y; },
          [y](const TabulatedGrowth& t) { return tabulated_value(t, y); },
      },
      g);
}

double growth_sup(const Growth& g, double lower) {
  lower = std::max(lower, 0.0);
  return std::visit(
      Overloaded{
          [lower](const ConstantGrowth& c) { return c.c >= 0.0 || lower > 0.0 ? c.c : 0.0; },
          [lower](const LogisticGrowth& l) {
            if (l.alpha <= 0.0 || l.beta <= 0.0) return l.c;
            const double peak = 0.5 * l.beta;
            const double y = std::max(lower, peak);
            return l.alpha * y * std::max(l.beta - y, 0.0) + l.c;
          },
          [lower](const SinkReleaseGrowth& s) {
            return std::max(-s.c * lower / (s.alpha + lower), -s.c);
          },
          [lower](const AffineGrowth& a) { return a.b >= 0.0 ? a.a - a.b * lower : kInf; },
          [lower](const TabulatedGrowth& t) {
            double best = tabulated_value(t, lower);
            for (std::size_t k = 0; k < t.knots.size(); ++k) {
              if (t.knots[k] >= lower) best = std::max(best, t.values[k]);
            }
            return best;
          },
      },
      g);
}

double growth_abs_sup(const Growth& g) {
  return std::visit(
      Overloaded{
          [](const ConstantGrowth& c) { return std::abs(c.c); },
          [](const LogisticGrowth& l) {
            const double peak = l.alpha * l.beta * l.beta / 4.0 + l.c;
            return std::max(std::abs(l.c), std::abs(peak));
          },
          [](const SinkReleaseGrowth& s) { return std::abs(s.c); },
          [](const AffineGrowth& a) { return a.b == 0.0 ? std::abs(a.a) : kInf; },
          [](const TabulatedGrowth& t) {
            double best = 0.0;
            for (double v : t.values) best = std::max(best, std::abs(v));
            return best;
          },
      },
      g);
}

double growth_limit(const Growth& g) {
  return std::visit(Overloaded{
                        [](const ConstantGrowth& c) { return c.c; },
                        [](const LogisticGrowth& l) { return l.c; },
                        [](const SinkReleaseGrowth& s) { return -s.c; },
                        [](const AffineGrowth& a) {
                          if (a.b > 0.0) return -kInf;
                          if (a.b < 0.0) return kInf;
                          return a.a;
                        },
                        [](const TabulatedGrowth& t) {
                          return t.values.empty() ? 0.0 : t.values.back();
                        },
                    },
                    g);
}

std::string_view growth_name(const Growth& g) {
  return std::visit(Overloaded{
                        [](const ConstantGrowth&) { return std::string_view("constant"); },
                        [](const LogisticGrowth&) { return std::string_view("logistic"); },
                        [](const SinkReleaseGrowth&) { return std::string_view("sink_release"); },
                        [](const AffineGrowth&) { return std::string_view("affine"); },
                        [](const TabulatedGrowth&) { return std::string_view("tabulated"); },
                    },
                    g);
}

// ---------------------------------------------------------------------------
// Rates

double CoerciveRate::base(double xi) const { return gamma * std::pow(offset + xi, exponent); }

double CoerciveRate::min_multiplier() const { return std::min(1.0, eps / eps_prime); }

double CoerciveRate::max_multiplier() const { return std::max(1.0, eps / eps_prime); }

double rate_value(const Rate& r, std::span<const double> x, Edge e) {
  return std::visit(Overloaded{
                        [](const ZeroRate&) { return 0.0; },
                        [](const ConstantRate& c) { return c.theta; },
                        [&](const PowerLawRate& p) {
                          return std::pow(std::max(1.0, x[e.from]), p.alpha);
                        },
                        [&](const CoerciveRate& c) {
                          const double xj = x[e.to];
                          return c.base(x[e.from]) * (c.eps + xj) / (c.eps_prime + xj);
                        },
                    },
                    r);
}

double rate_upper_bound(const Rate& r, double xi_max) {
  return std::visit(Overloaded{
                        [](const ZeroRate&) { return 0.0; },
                        [](const ConstantRate& c) { return c.theta; },
                        [&](const PowerLawRate& p) { return std::pow(std::max(1.0, xi_max), p.alpha); },
                        [&](const CoerciveRate& c) { return c.base(xi_max) * c.max_multiplier(); },
                    },
                    r);
}

bool is_zero(const Rate& r) { return std::holds_alternative<ZeroRate>(r); }

std::string_view rate_name(const Rate& r) {
  return std::visit(Overloaded{
                        [](const ZeroRate&) { return std::string_view("zero"); },
                        [](const ConstantRate&) { return std::string_view("constant"); },
                        [](const PowerLawRate&) { return std::string_view("power_law"); },
                        [](const CoerciveRate&) { return std::string_view("coercive"); },
                    },
                    r);
}

// ---------------------------------------------------------------------------
// Relative law with piecewise-linear density

RelativeLaw::RelativeLaw(std::vector<double> knots, std::vector<double> density)
    : knots_(std::move(knots)), density_(std::move(density)) {
  if (knots_.size() < 2 || knots_.size() != density_.size()) {
    throw ContractViolation("relative law needs at least two knots and one density value per knot");
  }
  if (knots_.front() < 0.0 || knots_.back() > 1.0) {
    throw ContractViolation("relative law support must lie in [0, 1]");
  }
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    if (!(knots_[k] < knots_[k + 1])) throw ContractViolation("relative law knots must increase");
  }
  for (double f : density_) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw ContractViolation("relative law density must be >= 0");
  }
  cumulative_.assign(knots_.size(), 0.0);
  double first_moment = 0.0;
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    const double a = knots_[k];
    const double b = knots_[k + 1];
    const double fa = density_[k];
    const double fb = density_[k + 1];
    cumulative_[k + 1] = cumulative_[k] + 0.5 * (fa + fb) * (b - a);
    // u·f(u) is quadratic on the segment, Simpson is exact
    const double m = 0.5 * (a + b);
    first_moment += (b - a) / 6.0 * (a * fa + 4.0 * m * 0.5 * (fa + fb) + b * fb);
  }
  if (!(cumulative_.back() > 0.0)) throw ContractViolation("relative law has zero mass");
  mean_ = first_moment / cumulative_.back();
}

RelativeLaw RelativeLaw::uniform(double lo, double hi) {
  const double h = 1.0 / (hi - lo);
  return RelativeLaw({lo, hi}, {h, h});
}

double RelativeLaw::cdf(double u) const {
  if (u <= knots_.front()) return 0.0;
  if (u >= knots_.back()) return 1.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
  const auto k = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double s = u - knots_[k];
  const double slope = (density_[k + 1] - density_[k]) / (knots_[k + 1] - knots_[k]);
  return (cumulative_[k] + density_[k] * s + 0.5 * slope * s * s) / mass();
}

double RelativeLaw::quantile(double xi) const {
  if (xi <= 0.0) return 0.0;
  const double target = std::min(xi, 1.0) * mass();
  std::size_t k = 0;
  while (k + 2 < knots_.size() && cumulative_[k + 1] < target) ++k;
  const double r = target - cumulative_[k];
  const double width = knots_[k + 1] - knots_[k];
  const double a = 0.5 * (density_[k + 1] - density_[k]) / width;
  const double b = density_[k];
  double s = 0.0;
  if (r > 0.0) {
    const double disc = std::max(b * b + 4.0 * a * r, 0.0);
    const double denom = b + std::sqrt(disc);
    s = denom > 0.0 ? 2.0 * r / denom : width;
  }
  return std::min(knots_[k] + std::min(s, width), knots_.back());
}

std::string_view amplitude_name(const Amplitude& a) {
  return std::visit(Overloaded{
                        [](const UniformFraction&) { return std::string_view("uniform_fraction"); },
                        [](const UnitDirac&) { return std::string_view("unit_dirac"); },
                        [](const RelativeLaw&) { return std::string_view("relative"); },
                        [](const CustomQuantile&) { return std::string_view("custom_quantile"); },
                    },
                    a);
}

bool is_relative(const Amplitude& a) {
  return std::holds_alternative<UniformFraction>(a) || std::holds_alternative<RelativeLaw>(a);
}

std::optional<RelativeLaw> relative_law(const Amplitude& a) {
  if (std::holds_alternative<UniformFraction>(a)) return RelativeLaw::uniform(0.0, 1.0);
  if (const auto* law = std::get_if<RelativeLaw>(&a)) return *law;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// NetworkModel

NetworkModel::NetworkModel(std::size_t n)
    : n_(n), classes_(n, PatchClass::Neutral), growth_(n, ConstantGrowth{0.0}), transfers_(n * n) {}

std::size_t NetworkModel::index(Edge e) const {
  if (e.from >= n_ || e.to >= n_) throw ContractViolation("edge endpoint out of range");
  if (e.from == e.to) throw ContractViolation("edges join distinct patches");
  return e.from * n_ + e.to;
}

void NetworkModel::set_patch(std::size_t i, PatchClass cls, Growth g) {
  if (i >= n_) throw ContractViolation("patch index out of range");
  classes_[i] = cls;
  growth_[i] = std::move(g);
}

void NetworkModel::set_transfer(Edge e, Rate rate, Amplitude amplitude, bool active) {
  auto& t = transfers_[index(e)];
  t.rate = std::move(rate);
  t.amplitude = std::move(amplitude);
  const auto it = std::lower_bound(active_.begin(), active_.end(), e);
  const bool present = it != active_.end() && *it == e;
  if (active && !present) active_.insert(it, e);
  if (!active && present) active_.erase(it);
}

const Transfer& NetworkModel::transfer(Edge e) const { return transfers_[index(e)]; }

bool NetworkModel::is_active(Edge e) const {
  return std::binary_search(active_.begin(), active_.end(), e);
}

std::vector<Edge> NetworkModel::live_edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i != j && !is_zero(transfers_[i * n_ + j].rate)) out.push_back({i, j});
    }
  }
  return out;
}

double NetworkModel::m_bound() const {
  if (supplied_m_bound_) return *supplied_m_bound_;
  double m = 0.0;
  for (const auto& g : growth_) m += growth_abs_sup(g);
  return m;
}

// ---------------------------------------------------------------------------
// Quantiles and debits

double quantile(const NetworkModel& model, Edge e, std::span<const double> x, double xi) {
  const double xi_pop = x[e.from];
  if (xi <= 0.0 || xi_pop <= 0.0) return 0.0;
  const auto& amp = model.transfer(e).amplitude;
  const double q = std::visit(Overloaded{
                                  [&](const UniformFraction&) { return std::min(xi, 1.0) * xi_pop; },
                                  [&](const UnitDirac&) { return std::min(1.0, xi_pop); },
                                  [&](const RelativeLaw& law) { return law.quantile(xi) * xi_pop; },
                                  [&](const CustomQuantile& c) { return c.fn(x, xi); },
                              },
                              amp);
  return std::clamp(q, 0.0, xi_pop);
}

double amplitude_mean(const NetworkModel& model, Edge e, std::span<const double> x) {
  const double xi_pop = x[e.from];
  if (xi_pop <= 0.0) return 0.0;
  const auto& amp = model.transfer(e).amplitude;
  if (std::holds_alternative<CustomQuantile>(amp)) {
    constexpr int kNodes = 1024;
    double sum = 0.0;
    for (int k = 0; k < kNodes; ++k) sum += quantile(model, e, x, (k + 0.5) / kNodes);
    return sum / kNodes;
  }
  return std::visit(Overloaded{
                        [&](const UniformFraction&) { return 0.5 * xi_pop; },
                        [&](const UnitDirac&) { return std::min(1.0, xi_pop); },
                        [&](const RelativeLaw& law) { return law.mean() * xi_pop; },
                        [&](const CustomQuantile&) { return 0.0; },
                    },
                    amp);
}

double debit(const NetworkModel& model, std::span<const double> x, Edge e) {
  const auto& rate = model.transfer(e).rate;
  if (is_zero(rate)) return 0.0;
  const double theta = rate_value(rate, x, e);
  if (theta == 0.0) return 0.0;
  return theta * amplitude_mean(model, e, x);
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::has(IssueKind k) const {
  return std::any_of(issues.begin(), issues.end(), [k](const auto& i) { return i.kind == k; });
}

bool ValidationReport::blocks_simulation() const {
  return has(IssueKind::Structural) || has(IssueKind::AmplitudeLaw);
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& i : issues) os << "[" << to_string(i.kind) << "] " << i.where << ": " << i.message << "\n";
  return os.str();
}

namespace {

std::string patch_label(std::size_t i) { return "patch " + std::to_string(i + 1); }

std::string edge_label(Edge e) {
  return "edge (" + std::to_string(e.from + 1) + "," + std::to_string(e.to + 1) + ")";
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

void check_growth_structure(const Growth& g, const std::string& where, std::vector<ValidationIssue>& out) {
  auto flag = [&](std::string msg) { out.push_back({IssueKind::Structural, where, std::move(msg)}); };
  std::visit(Overloaded{
                 [&](const ConstantGrowth& c) {
                   if (!std::isfinite(c.c)) flag("constant growth must be finite");
                 },
                 [&](const LogisticGrowth& l) {
                   if (!finite_all({l.alpha, l.beta, l.c}) || l.alpha < 0.0 || l.beta < 0.0) {
                     flag("logistic growth needs finite alpha >= 0, beta >= 0");
                   }
                 },
                 [&](const SinkReleaseGrowth& s) {
                   if (!finite_all({s.c, s.alpha}) || s.alpha <= 0.0) flag("sink release needs alpha > 0");
                 },
                 [&](const AffineGrowth& a) {
                   if (!finite_all({a.a, a.b}) || a.a < 0.0) {
                     flag("affine growth needs a >= 0 so that zero stays reachable from above only");
                   }
                 },
                 [&](const TabulatedGrowth& t) {
                   if (t.knots.empty() || t.knots.size() != t.values.size()) {
                     flag("tabulated growth needs matching, non-empty knots and values");
                     return;
                   }
                   if (t.knots.front() != 0.0) flag("tabulated growth must start at knot 0");
                   for (std::size_t k = 0; k + 1 < t.knots.size(); ++k) {
                     if (!(t.knots[k] < t.knots[k + 1])) flag("tabulated knots must increase");
                   }
                   for (double v : t.values) {
                     if (!std::isfinite(v)) flag("tabulated values must be finite");
                   }
                 },
             },
             g);
}

// Sign rules per patch class, exact per variant.
std::optional<std::string> sign_rule_violation(PatchClass cls, const Growth& g) {
  switch (cls) {
    case PatchClass::Source: {
      const bool ok = std::visit(
          Overloaded{
              [](const ConstantGrowth& c) { return c.c > 0.0; },
              [](const LogisticGrowth& l) { return l.c > 0.0; },
              [](const SinkReleaseGrowth&) { return false; },
              [](const AffineGrowth& a) { return a.a > 0.0 && a.b == 0.0; },
              [](const TabulatedGrowth& t) {
                return std::all_of(t.values.begin(), t.values.end(), [](double v) { return v > 0.0; });
              },
          },
          g);
      if (!ok) return "source growth must be strictly positive everywhere";
      return std::nullopt;
    }
    case PatchClass::Neutral: {
      const bool ok = std::visit(
          Overloaded{
              [](const ConstantGrowth& c) { return c.c == 0.0; },
              [](const LogisticGrowth& l) { return l.c == 0.0 && (l.alpha == 0.0 || l.beta == 0.0); },
              [](const SinkReleaseGrowth& s) { return s.c == 0.0; },
              [](const AffineGrowth& a) { return a.a == 0.0 && a.b == 0.0; },
              [](const TabulatedGrowth& t) {
                return std::all_of(t.values.begin(), t.values.end(), [](double v) { return v == 0.0; });
              },
          },
          g);
      if (!ok) return "neutral growth must vanish identically";
      return std::nullopt;
    }
    case PatchClass::Sink: {
      const bool ok = std::visit(
          Overloaded{
              [](const ConstantGrowth& c) { return c.c < 0.0; },
              [](const LogisticGrowth&) { return false; },
              [](const SinkReleaseGrowth& s) { return s.c > 0.0 && s.alpha > 0.0; },
              [](const AffineGrowth& a) { return a.a == 0.0 && a.b > 0.0; },
              [](const TabulatedGrowth& t) {
                if (t.values.empty() || t.values.front() != 0.0) return false;
                return std::all_of(t.values.begin() + 1, t.values.end(), [](double v) { return v < 0.0; });
              },
          },
          g);
      if (!ok) return "sink growth must be <= 0, vanish at 0 and be < 0 on (0, inf)";
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void check_rate_structure(const Rate& r, const std::string& where, std::vector<ValidationIssue>& out) {
  std::visit(Overloaded{
                 [](const ZeroRate&) {},
                 [&](const ConstantRate& c) {
                   if (!std::isfinite(c.theta) || c.theta < 0.0) {
                     out.push_back({IssueKind::Structural, where, "constant rate must be finite and >= 0"});
                   }
                 },
                 [&](const PowerLawRate& p) {
                   if (!std::isfinite(p.alpha) || p.alpha <= 0.0) {
                     out.push_back({IssueKind::Structural, where, "power-law exponent must be > 0"});
                   } else if (p.alpha > 1.0) {
                     out.push_back({IssueKind::RateShape, where, "power-law exponent must lie in (0, 1]"});
                   }
                 },
                 [&](const CoerciveRate& c) {
                   if (!finite_all({c.gamma, c.offset, c.exponent, c.eps, c.eps_prime}) || c.gamma <= 0.0 ||
                       c.offset < 0.0 || c.exponent <= 0.0 || c.eps <= 0.0 || c.eps_prime <= 0.0) {
                     out.push_back({IssueKind::Structural, where,
                                    "coercive rate needs gamma > 0, offset >= 0, exponent > 0, eps, eps' > 0"});
                   } else if (c.exponent > 1.0) {
                     out.push_back({IssueKind::RateShape, where,
                                    "coercive exponent above 1 breaks subadditivity of the base function"});
                   }
                 },
             },
             r);
}

void check_amplitude(const NetworkModel& model, Edge e, const std::string& where,
                     std::vector<ValidationIssue>& out) {
  const auto& amp = model.transfer(e).amplitude;
  if (const auto* law = std::get_if<RelativeLaw>(&amp)) {
    if (std::abs(law->mass() - 1.0) > 1e-9) {
      out.push_back({IssueKind::AmplitudeLaw, where,
                     "relative density integrates to " + std::to_string(law->mass()) + ", expected 1"});
    }
  }
  if (const auto* custom = std::get_if<CustomQuantile>(&amp)) {
    if (!custom->fn) {
      out.push_back({IssueKind::AmplitudeLaw, where, "custom quantile has no function"});
      return;
    }
    for (double level : kProbeLevels) {
      std::vector<double> x(model.size(), level);
      double prev = 0.0;
      for (int k = 1; k <= 9; ++k) {
        const double q = custom->fn(x, k / 10.0);
        if (!(q >= 0.0 && q <= x[e.from]) || q < prev) {
          out.push_back({IssueKind::AmplitudeLaw, where,
                         "custom quantile leaves [0, x_i] or decreases in xi at probe level " +
                             std::to_string(level)});
          return;
        }
        prev = q;
      }
    }
  }
}

}  // namespace

ValidationReport validate_model(const NetworkModel& model) {
  ValidationReport rep;
  auto& out = rep.issues;
  const std::size_t n = model.size();
  if (n == 0) {
    out.push_back({IssueKind::Structural, "model", "model has no patches"});
    return rep;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto where = patch_label(i);
    check_growth_structure(model.growth(i), where, out);
    if (auto msg = sign_rule_violation(model.patch_class(i), model.growth(i))) {
      out.push_back({IssueKind::AssumptionA, where, *msg});
    }
    if (i > 0 && model.patch_class(i) < model.patch_class(i - 1)) {
      out.push_back({IssueKind::Layout, where, "patches must be ordered sources, neutral, sinks"});
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Edge e{i, j};
      const auto where = edge_label(e);
      check_rate_structure(model.transfer(e).rate, where, out);
      if (!is_zero(model.transfer(e).rate) || model.is_active(e)) check_amplitude(model, e, where, out);
    }
  }

  for (const Edge e : model.active_edges()) {
    const auto& rate = model.transfer(e).rate;
    const bool positive = std::visit(Overloaded{
                                         [](const ZeroRate&) { return false; },
                                         [](const ConstantRate& c) { return c.theta > 0.0; },
                                         [](const PowerLawRate& p) { return p.alpha > 0.0; },
                                         [](const CoerciveRate& c) { return c.gamma > 0.0; },
                                     },
                                     rate);
    if (!positive) {
      out.push_back({IssueKind::ActiveGraph, edge_label(e),
                     "active edge needs a rate that is > 0 whenever the origin is occupied"});
    }
  }

  // Growth bound: per-coordinate extremes over the probe grid bound |Σφ| on the product grid.
  double sum_max = 0.0;
  double sum_min = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double hi = -kInf;
    double lo = kInf;
    for (double y : kProbeLevels) {
      const double v = growth_value(model.growth(i), y);
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    sum_max += hi;
    sum_min += lo;
  }
  const double probed = std::max(std::abs(sum_max), std::abs(sum_min));
  const double m = model.m_bound();
  if (!std::isfinite(m)) {
    out.push_back({IssueKind::GrowthBound, "model", "growth field is unbounded; supply m_bound"});
  } else if (m + 1e-12 * std::max(1.0, probed) < probed) {
    out.push_back({IssueKind::GrowthBound, "model",
                   "m_bound " + std::to_string(m) + " below probed |sum phi| " + std::to_string(probed)});
  }
  return rep;
}

void require_simulable(const NetworkModel& model) {
  const auto rep = validate_model(model);
  if (rep.blocks_simulation()) throw ModelValidationError("model cannot be simulated:\n" + rep.summary());
}

}  // namespace pdmp
