#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdmp/model.hpp"

namespace pdmp {

enum class Aggregate { Min, Max, Sum };
enum class Compare { Ge, Gt, Le, Lt, Eq };

/// agg_{i ∈ patches} x_i  op  value; an empty patch list means every patch.
struct Atom {
  Aggregate agg = Aggregate::Sum;
  std::vector<std::size_t> patches;
  Compare op = Compare::Ge;
  double value = 0.0;
};

/// Conjunction of atoms; no atoms means always true.
///
/// Text form (indices 1-based):
///   true
///   x2 > 0
///   min(1,2) >= 10 && sum >= 50
class Predicate {
 public:
  Predicate() = default;
  explicit Predicate(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

  /// Throws ConfigError on a syntax error or a patch index outside [1, n].
  static Predicate parse(std::string_view text, std::size_t n);

  bool operator()(std::span<const double> x) const;
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::string to_string() const;

  /// True when every atom has the form min(...) >= r or sum >= r over all patches.
  bool is_region() const;

 private:
  std::vector<Atom> atoms_;
};

/// Time spent in the predicate's set while x flows from x0 for dt. Exact
/// (up to crossing bisection) for min/max atoms and for sums of linear flows;
/// sums of nonlinear flows are bracketed on a 64-point grid.
double segment_time_in_set(const NetworkModel& model, std::span<const double> x0, double dt,
                           const Predicate& pred);

/// Earliest time in [0, dt] at which the flowed state satisfies the predicate.
std::optional<double> segment_first_entry(const NetworkModel& model, std::span<const double> x0, double dt,
                                          const Predicate& pred);

}  // namespace pdmp
