#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/predicate.hpp"
#include "pdmp/stats.hpp"

namespace pdmp {

struct CheckResult {
  bool pass = true;
  std::vector<std::string> reasons;  // why it failed
  std::vector<std::string> notes;    // caveats that do not fail the check
};

/// A: growth structure and sign rules plus finite-drain probes on sinks.
/// B: every sink reachable from every patch, every neutral patch reachable from a source.
struct AssumptionReport {
  CheckResult a;
  CheckResult b;
};

AssumptionReport check_assumptions(const NetworkModel& model);

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

/// d_−(l): length of the shortest active path from l to a sink (kUnreachable if none).
std::vector<std::size_t> sink_distances(const NetworkModel& model);
bool strongly_connected(const NetworkModel& model);
bool weakly_connected(const NetworkModel& model);

enum class Classification { Ergodic, Transient, Unknown };
std::string_view to_string(Classification c);

struct TrafficResult {
  double sum = 0.0;
  Classification verdict = Classification::Unknown;  // Ergodic iff sum < 0, else Transient
};

/// Σ c_i for constant growth. Throws UnsupportedModel for other growth variants
/// and ModelValidationError when every c_i is zero.
TrafficResult traffic_condition(const NetworkModel& model);

struct DriftProbe {
  double R = 0.0;
  double sup = 0.0;
};

/// sup of Σφ over the grid where patches in `subset` take values {R, 2R, 4R}
/// and the others {0, R}. Σφ is separable, so the grid sup is the sum of
/// per-patch sups.
std::vector<DriftProbe> drift_limit_probe(const NetworkModel& model, std::span<const std::size_t> subset,
                                          std::span<const double> R_values);

/// Closed-form limsup of Σφ as min over `subset` → ∞, the other coordinates free.
double drift_limit(const NetworkModel& model, std::span<const std::size_t> subset);

/// One active edge (l, j) with d_−(l) > d_−(j) per source or neutral patch l,
/// smallest eligible target first, ordered by l. Throws ModelValidationError
/// when the topology check fails.
std::vector<Edge> construct_exit_edges(const NetworkModel& model);

struct SinkCycle {
  bool found = false;
  std::vector<Edge> edges;  // closed walk
  std::string reason;       // set when not found
};

/// Closed walk through every sink built by chaining shortest active paths
/// s_1 → s_2 → ... → s_k → s_1.
SinkCycle construct_sink_cycle(const NetworkModel& model);

struct Assumption2Params {
  Predicate S;
  Predicate S_prime;
  double T = 1.0;
  double T_prime = 1.0;
  double R = 0.0;
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
};

struct Assumption2Estimate {
  stats::Interval delta;  // min over start states outside S of P(hit S' within T)
  stats::Interval eps;    // min over start states in S' of P(stay in S through T')
  std::size_t delta_states = 0;
  std::size_t eps_states = 0;
  double c = 0.0;           // −sup of Σφ over S
  double sup_growth = 0.0;  // sup of Σφ over the whole state space
  double lhs = 0.0;         // ε T' c
  double rhs = 0.0;         // (1 − ε)(T/δ) sup Σφ
  bool holds = false;
  std::vector<std::string> notes;
};

/// Start states are the grid {L·e_i, L·(e_i + e_j)/2, L·(1,...,1)/n} for
/// L ∈ {R, 2R} (L ∈ {1, 2} when R = 0). S and S' must be region predicates.
Assumption2Estimate estimate_assumption2(const NetworkModel& model, const Assumption2Params& p);

enum class Family { Multiplicative, Unitary, Other };
std::string_view to_string(Family f);

/// Family membership from rates and amplitudes alone (the assumption checks are separate).
Family detect_family(const NetworkModel& model);

struct StabilityReport {
  AssumptionReport assumptions;
  Family family = Family::Other;
  bool constant_growth = false;
  bool strongly_connected = false;
  bool weakly_connected = false;
  std::optional<double> traffic_sum;
  double drift_all = 0.0;                 // limsup as min over all patches → ∞
  std::optional<double> drift_sinks;      // limsup as min over sinks → ∞
  std::vector<DriftProbe> drift_probe;    // numeric witness of drift_all
  Classification classification = Classification::Unknown;
  std::string cited_condition;
  std::vector<std::string> notes;
};

StabilityReport classify(const NetworkModel& model);

}  // namespace pdmp
