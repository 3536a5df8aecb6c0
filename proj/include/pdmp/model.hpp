#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pdmp {

enum class PatchClass { Source, Neutral, Sink };

std::string_view to_string(PatchClass c);

/// Ordered pair (from, to) of distinct patches, 0-based.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// ---------------------------------------------------------------------------
// Autonomous growth φ^i(x_i). Every variant depends on the patch's own
// population only.

/// φ(y) = c for c ≥ 0, φ(y) = c·1{y > 0} for c < 0.
struct ConstantGrowth {
  double c = 0.0;
};

/// Source form of the logistic example: φ(y) = α·y·(β − y)_+ + c.
struct LogisticGrowth {
  double alpha = 0.0;
  double beta = 0.0;
  double c = 0.0;
};

/// Sink form of the logistic example: φ(y) = −c·y/(α + y).
struct SinkReleaseGrowth {
  double c = 0.0;
  double alpha = 0.0;
};

/// φ(y) = a − b·y. Used for the linear-restoring stationary example; not bounded.
struct AffineGrowth {
  double a = 0.0;
  double b = 0.0;
};

/// Piecewise-linear φ through (knots[k], values[k]), knots[0] = 0, held constant
/// beyond the last knot.
struct TabulatedGrowth {
  std::vector<double> knots;
  std::vector<double> values;
};

using Growth =
    std::variant<ConstantGrowth, LogisticGrowth, SinkReleaseGrowth, AffineGrowth, TabulatedGrowth>;

double growth_value(const Growth& g, double y);
/// sup of φ over [lower, ∞).
double growth_sup(const Growth& g, double lower = 0.0);
/// sup of |φ| over [0, ∞); +inf for unbounded variants.
double growth_abs_sup(const Growth& g);
/// lim φ(y) as y → ∞ (−inf for Affine with b > 0).
double growth_limit(const Growth& g);
std::string_view growth_name(const Growth& g);

// ---------------------------------------------------------------------------
// Jump rates θ_{i,j}(x).

struct ZeroRate {};

struct ConstantRate {
  double theta = 0.0;
};

/// θ(x) = (1 ∨ x_i)^α.
struct PowerLawRate {
  double alpha = 1.0;
};

/// θ(x) = γ·(b + x_i)^p·(ε + x_j)/(ε' + x_j). With b = 0, p = 1 this is the
/// carrying-capacity rate of the logistic example; the x_j factor lies between
/// min(1, ε/ε') and max(1, ε/ε').
struct CoerciveRate {
  double gamma = 1.0;
  double offset = 0.0;
  double exponent = 1.0;
  double eps = 1.0;
  double eps_prime = 1.0;

  double base(double xi) const;  // Θ-shape γ·(b + x_i)^p
  double min_multiplier() const;
  double max_multiplier() const;
};

using Rate = std::variant<ZeroRate, ConstantRate, PowerLawRate, CoerciveRate>;

double rate_value(const Rate& r, std::span<const double> x, Edge e);
/// Upper bound of θ over all states with x_i ≤ xi_max.
double rate_upper_bound(const Rate& r, double xi_max);
bool is_zero(const Rate& r);
std::string_view rate_name(const Rate& r);

// ---------------------------------------------------------------------------
// Transfer amplitude laws μ_{i,j}(x, ·) on [0, x_i].

/// U([0, x_i]).
struct UniformFraction {};

/// δ_{1 ∧ x_i}.
struct UnitDirac {};

/// A law on [0, 1] with piecewise-linear density, applied to x_i multiplicatively.
class RelativeLaw {
 public:
  /// Throws ContractViolation when knots are not increasing inside [0, 1], sizes
  /// differ, or a density value is negative.
  RelativeLaw(std::vector<double> knots, std::vector<double> density);

  static RelativeLaw uniform(double lo, double hi);

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& density() const { return density_; }
  /// Total mass of the density (1 for a proper law).
  double mass() const { return cumulative_.back(); }
  double mean() const { return mean_; }
  double cdf(double u) const;
  /// Generalised inverse on the normalised law; 0 at ξ = 0.
  double quantile(double xi) const;

 private:
  std::vector<double> knots_;
  std::vector<double> density_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
};

/// User-supplied quantile q(x, ξ) for one edge; must land in [0, x_from].
struct CustomQuantile {
  std::function<double(std::span<const double>, double)> fn;
  std::string label;
};

using Amplitude = std::variant<UniformFraction, UnitDirac, RelativeLaw, CustomQuantile>;

std::string_view amplitude_name(const Amplitude& a);
/// True for laws that scale with x_i (the multiplicative family).
bool is_relative(const Amplitude& a);
/// Law of the moved fraction for relative amplitudes; nullopt otherwise.
std::optional<RelativeLaw> relative_law(const Amplitude& a);

struct Transfer {
  Rate rate = ZeroRate{};
  Amplitude amplitude = UniformFraction{};
};

// ---------------------------------------------------------------------------

/// One process instance: graph, patch classes, growth fields, rates and
/// amplitude laws. Rates are stored for every ordered pair (Zero by default);
/// the active set 𝒜 is declared separately.
class NetworkModel {
 public:
  explicit NetworkModel(std::size_t n = 0);

  std::size_t size() const { return n_; }

  void set_patch(std::size_t i, PatchClass cls, Growth g);
  /// Sets the rate and amplitude of `e`; `active` adds it to 𝒜.
  void set_transfer(Edge e, Rate rate, Amplitude amplitude, bool active = true);

  PatchClass patch_class(std::size_t i) const { return classes_.at(i); }
  const Growth& growth(std::size_t i) const { return growth_.at(i); }
  const Transfer& transfer(Edge e) const;
  const std::vector<Edge>& active_edges() const { return active_; }
  bool is_active(Edge e) const;
  /// Ordered pairs with a non-Zero rate, sorted.
  std::vector<Edge> live_edges() const;

  void set_m_bound(std::optional<double> m) { supplied_m_bound_ = m; }
  const std::optional<double>& supplied_m_bound() const { return supplied_m_bound_; }
  /// Supplied bound, or Σ_i sup|φ^i| derived from the variants.
  double m_bound() const;

  std::string name;

 private:
  std::size_t index(Edge e) const;

  std::size_t n_ = 0;
  std::vector<PatchClass> classes_;
  std::vector<Growth> growth_;
  std::vector<Transfer> transfers_;  // n × n, diagonal unused
  std::vector<Edge> active_;
  std::optional<double> supplied_m_bound_;
};

struct State {
  std::vector<double> x;
  double t = 0.0;
};

// ---------------------------------------------------------------------------
// Validation. Violations are data; only Structural ones stop a simulation.

enum class IssueKind {
  Structural,
  Layout,
  AssumptionA,
  ActiveGraph,
  RateShape,
  AmplitudeLaw,
  GrowthBound,
};

std::string_view to_string(IssueKind k);

struct ValidationIssue {
  IssueKind kind;
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(IssueKind k) const;
  /// Issues that make the process ill-defined (bad indices, negative rates,
  /// improper amplitude laws).
  bool blocks_simulation() const;
  std::string summary() const;
};

ValidationReport validate_model(const NetworkModel& model);
/// Throws ModelValidationError when the report blocks simulation.
void require_simulable(const NetworkModel& model);

/// q_{i,j}(x, ξ): generalised inverse of μ_{i,j}(x, ·), in [0, x_i].
double quantile(const NetworkModel& model, Edge e, std::span<const double> x, double xi);
/// Mean of μ_{i,j}(x, ·).
double amplitude_mean(const NetworkModel& model, Edge e, std::span<const double> x);
/// d_{i,j}(x) = θ_{i,j}(x) · mean of μ_{i,j}(x, ·).
double debit(const NetworkModel& model, std::span<const double> x, Edge e);

}  // namespace pdmp
