#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/predicate.hpp"
#include "pdmp/sim.hpp"
#include "pdmp/stats.hpp"

namespace pdmp {

/// A C¹ test function with its gradient. `degree` is the polynomial degree
/// when f is a polynomial (enables exact Gauss–Legendre jump integrals), or
/// −1 otherwise.
struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  int degree = -1;
};

TestFunction constant_function(double c);
TestFunction coordinate_function(std::size_t i);         // x_i
TestFunction total_function();                           // Σ x_i
TestFunction coordinate_square_function(std::size_t i);  // x_i²

/// 𝔄f(x) = ∇f·φ + Σ θ_{i,j}(x) ∫ (f(x + y(e_j − e_i)) − f(x)) μ_{i,j}(x, dy).
double generator_apply(const NetworkModel& model, const TestFunction& f, std::span<const double> x);

struct DynkinResult {
  double finite_difference = 0.0;  // (E f(X_h) − f(x))/h
  double std_error = 0.0;
  double generator = 0.0;          // 𝔄f(x)
  double bias_allowance = 0.0;     // |E 𝔄f(X_h) − 𝔄f(x)|/2
  double z = 0.0;
};

/// One batch of `replicas` runs to time h from x, shared by every function.
std::vector<DynkinResult> dynkin_check(const NetworkModel& model, std::span<const TestFunction> fs,
                                       std::span<const double> x, double h, std::size_t replicas,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Path averages

struct PathWindow {
  double burn_in = 0.2;     // fraction of [0, t_end] discarded
  std::size_t batches = 20;
  double level = 0.95;
};

/// Time averages of g(X_t) over each batch window of [burn_in·t_end, t_end],
/// integrated segment by segment (5-point Gauss–Legendre between drains).
/// Result is [function][batch].
std::vector<std::vector<double>> batch_time_averages(
    const NetworkModel& model, const Trajectory& traj,
    std::span<const std::function<double(std::span<const double>)>> gs, const PathWindow& w);

struct StationaryEstimate {
  std::string label;
  stats::BatchEstimate estimate;
};

struct StationaryStats {
  std::vector<StationaryEstimate> generator_means;  // time averages of 𝔄f, one per test function
  std::vector<StationaryEstimate> balance;          // per patch: φ^i + Σ_j (d_{j,i} − d_{i,j})
  std::vector<StationaryEstimate> means;            // per patch: x_i
  std::vector<StationaryEstimate> debits;           // per live edge: d_{i,j}
  double span = 0.0;                                // total time after burn-in
  std::vector<std::string> warnings;
};

/// Pools the batches of every trajectory. Attaches a warning when the model is not classified ergodic.
StationaryStats stationary_residuals(const NetworkModel& model, std::span<const Trajectory> trajs,
                                     std::span<const TestFunction> fs, const PathWindow& w = {});

/// Stationary means of the linear-restoring model (φ^i = a_i − x_i, unit rates,
/// amplitude mean m_i x_i): solves (1 + m_i(n−1)) E_i − Σ_{j≠i} m_j E_j = a_i.
std::vector<double> restoring_means(std::span<const double> a, std::span<const double> m);
/// Max absolute residual of that system at E.
double restoring_residual(std::span<const double> a, std::span<const double> m, std::span<const double> E);

/// Stationary P(x_n > 0) = Σ_{j<n} c_j / |c_n| for constant growth with a single
/// sink in last position and c_j ≥ 0 elsewhere; nullopt for any other model.
std::optional<double> one_exit_occupancy(const NetworkModel& model);

/// Fraction of [from, t_end] during which the predicate holds.
double occupancy(const NetworkModel& model, const Trajectory& traj, const Predicate& pred, double from = 0.0);

/// Accumulates time-in-set from simulate's segment callback, for runs too long to store.
class OccupancyMeter {
 public:
  OccupancyMeter(const NetworkModel& model, Predicate pred, double from = 0.0, std::size_t batches = 0,
                 double t_end = 0.0);
  void operator()(double t0, std::span<const double> x0, double t1);
  double fraction() const;
  /// Per-batch fractions when batches were requested.
  std::vector<double> batch_fractions() const;

 private:
  const NetworkModel* model_;
  Predicate pred_;
  double from_;
  double t_end_;
  double inside_ = 0.0;
  double total_ = 0.0;
  std::vector<double> batch_inside_;
};

struct EnsembleOccupancy {
  stats::Interval fraction;
  std::size_t replicas = 0;
};

/// Fraction of replicas whose state at t_end satisfies the predicate.
EnsembleOccupancy endpoint_occupancy(const NetworkModel& model, std::span<const double> x0, double t_end,
                                     const Predicate& pred, std::size_t replicas, std::uint64_t seed);

/// log of the time average of exp(η·sqrt(‖X_t‖₁)) over [from, t_end].
double log_f_moment(const NetworkModel& model, const Trajectory& traj, double eta, double from = 0.0);

/// Correlation between 1{x_n > 0} and Σ x_i, sampled on a time grid after burn-in.
struct Correlation {
  double r = 0.0;
  double half_width = 0.0;  // Fisher-z 95% half-width mapped back to r
  std::size_t samples = 0;
};
Correlation indicator_total_correlation(const NetworkModel& model, const Trajectory& traj, std::size_t patch,
                                        double step, double burn_in = 0.2);

// ---------------------------------------------------------------------------
// Drift walk

struct DriftWalkParams {
  double eps = 0.5;
  double delta = 0.5;
  double c = 1.0;
  double T = 1.0;
  double T_prime = 1.0;
  double M = 1.0;
};

/// Throws ContractViolation unless every parameter is positive and ε, δ ∈ (0, 1].
void validate(const DriftWalkParams& p);

struct GammaRate {
  bool in_domain = false;
  double value = 0.0;
  double r_max = 0.0;  // ln(1/(1−δ))/(TM)
  std::vector<std::string> warnings;
};

/// γ(r) = −ln(δ(1−ε)/(e^{−rTM} − (1−δ)) + ε e^{−rcT'}), for r < ln(1/(1−δ))/(TM).
GammaRate gamma_rate(double r, const DriftWalkParams& p);

/// −ε c T' + (1 − ε)(T/δ) M.
double drift_walk_mean_increment(const DriftWalkParams& p);

/// Y_1 = y0, Y_{k+1} − Y_k = −B c T' + (1 − B) Γ T M, B ~ Bernoulli(ε), Γ shifted geometric(δ).
std::vector<double> drift_walk(const DriftWalkParams& p, double y0, std::size_t steps, std::uint64_t seed,
                               std::uint64_t stream = 0);

struct MartingaleCheck {
  double gamma = 0.0;
  std::vector<double> means;       // k = 1..steps, of exp(r(Y_k − Y_1) + γ(k−1))
  std::vector<double> std_errors;
  stats::Regression slope;         // weighted by 1/SE²
  double slope_z = 0.0;
  double mean_increment = 0.0;     // empirical
  double mean_increment_theory = 0.0;
};

MartingaleCheck martingale_check(const DriftWalkParams& p, double r, std::size_t replicas, std::size_t steps,
                                 std::uint64_t seed);

struct HittingBound {
  double lhs = 0.0;        // mean of exp(γ(σ_R − 1))
  double lhs_lower = 0.0;  // lower 95% bound of that mean
  double rhs = 0.0;        // exp(r(y0 − R + cT'))
  bool holds = false;
  std::size_t censored = 0;
};

/// Checks E[e^{γ(r)(σ_R − 1)}] ≤ e^{r(y0 − R + cT')} for σ_R the first k with Y_k ≤ R.
HittingBound hitting_time_bound(const DriftWalkParams& p, double r, double y0, double R, std::size_t replicas,
                                std::size_t max_steps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Two-patch scaling diagnostics

struct BetaDiagnostic {
  bool ok = false;
  std::string failure;
  std::size_t replicas = 0;
  double sample_mean = 0.0;
  double alpha = 0.0;  // moment-matched
  double beta = 0.0;
  stats::Interval ratio;     // α/β = mean/(1 − mean), with CI
  double expected_ratio = 0.0;  // θ_{2,1}/θ_{1,2}
  double ks = 0.0;
  double ks_critical = 0.0;
  double ks_pvalue = 0.0;
  std::vector<double> sample;  // sorted shares
};

/// Share of patch 1 at t_end across replicas, fitted to a Beta law.
BetaDiagnostic beta_diagnostic(const NetworkModel& model, std::span<const double> x0, double t_end,
                               std::size_t replicas, std::uint64_t seed);

/// Fitted by moment matching from a sample in (0, 1); used by beta_diagnostic.
BetaDiagnostic fit_beta(std::span<const double> sample, double expected_ratio);

struct GrowthSlope {
  stats::Regression fit;
  double expected = 0.0;  // Σ lim φ^i
  std::vector<double> t;
  std::vector<double> mean_total;
};

/// Regression of the replica-mean total population on t over [t_from, t_end].
GrowthSlope total_growth_slope(const NetworkModel& model, std::span<const double> x0, double t_from,
                               double t_end, double step, std::size_t replicas, std::uint64_t seed);

struct ScalingTrend {
  std::vector<double> R;
  std::vector<double> mean_gap;
  bool decreasing = false;
};

ScalingTrend scaling_trend(const NetworkModel& model, std::span<const double> s0, std::span<const double> R_values,
                           std::size_t seeds, std::uint64_t seed);

}  // namespace pdmp
