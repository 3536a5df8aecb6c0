#include "pdmp/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

#include "pdmp/errors.hpp"
#include "pdmp/flow.hpp"

namespace pdmp {

namespace {

double aggregate(const Atom& a, std::span<const double> x) {
  auto each = [&](auto&& fn) {
    if (a.patches.empty()) {
      for (double v : x) fn(v);
    } else {
      for (std::size_t i : a.patches) fn(x[i]);
    }
  };
  switch (a.agg) {
    case Aggregate::Min: {
      double m = std::numeric_limits<double>::infinity();
      each([&](double v) { m = std::min(m, v); });
      return m;
    }
    case Aggregate::Max: {
      double m = -std::numeric_limits<double>::infinity();
      each([&](double v) { m = std::max(m, v); });
      return m;
    }
    case Aggregate::Sum: {
      double s = 0.0;
      each([&](double v) { s += v; });
      return s;
    }
  }
  return 0.0;
}

bool compare(double lhs, Compare op, double rhs) {
  switch (op) {
    case Compare::Ge: return lhs >= rhs;
    case Compare::Gt: return lhs > rhs;
    case Compare::Le: return lhs <= rhs;
    case Compare::Lt: return lhs < rhs;
    case Compare::Eq: return lhs == rhs;
  }
  return false;
}

std::string_view op_text(Compare op) {
  switch (op) {
    case Compare::Ge: return ">=";
    case Compare::Gt: return ">";
    case Compare::Le: return "<=";
    case Compare::Lt: return "<";
    case Compare::Eq: return "==";
  }
  return "?";
}

class Parser {
 public:
  Parser(std::string_view s, std::size_t n) : s_(s), n_(n) {}

  Predicate run() {
    skip();
    if (eat_word("true")) {
      expect_end();
      return {};
    }
    std::vector<Atom> atoms{atom()};
    for (;;) {
      skip();
      if (pos_ == s_.size()) break;
      if (!eat("&&")) fail("expected '&&'");
      atoms.push_back(atom());
    }
    return Predicate(std::move(atoms));
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("predicate '" + std::string(s_) + "': " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  bool eat_word(std::string_view w) {
    skip();
    if (s_.substr(pos_, w.size()) != w) return false;
    const std::size_t end = pos_ + w.size();
    if (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) return false;
    pos_ = end;
    return true;
  }

  void expect_end() {
    skip();
    if (pos_ != s_.size()) fail("trailing input");
  }

  std::size_t index() {
    skip();
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected a patch index");
    pos_ = static_cast<std::size_t>(p - s_.data());
    if (v < 1 || v > n_) fail("patch index " + std::to_string(v) + " outside [1, " + std::to_string(n_) + "]");
    return v - 1;
  }

  double number() {
    skip();
    const char* begin = s_.data() + pos_;
    std::size_t len = 0;
    while (pos_ + len < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_ + len])) || std::strchr("+-.eE", s_[pos_ + len]))) {
      ++len;
    }
    if (len == 0) fail("expected a number");
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(begin, len), &used);
      if (used != len) fail("bad number");
      pos_ += len;
      return v;
    } catch (const std::logic_error&) {
      fail("bad number");
    }
  }

  Compare op() {
    if (eat(">=")) return Compare::Ge;
    if (eat("<=")) return Compare::Le;
    if (eat("==")) return Compare::Eq;
    if (eat(">")) return Compare::Gt;
    if (eat("<")) return Compare::Lt;
    fail("expected a comparison");
  }

  Atom atom() {
    Atom a;
    skip();
    if (eat_word("min")) {
      a.agg = Aggregate::Min;
    } else if (eat_word("max")) {
      a.agg = Aggregate::Max;
    } else if (eat_word("sum")) {
      a.agg = Aggregate::Sum;
    } else if (pos_ < s_.size() && s_[pos_] == 'x') {
      ++pos_;
      a.agg = Aggregate::Min;
      a.patches.push_back(index());
      a.op = op();
      a.value = number();
      return a;
    } else {
      fail("expected min, max, sum or x<index>");
    }
    if (eat("(")) {
      a.patches.push_back(index());
      while (eat(",")) a.patches.push_back(index());
      if (!eat(")")) fail("expected ')'");
      std::sort(a.patches.begin(), a.patches.end());
      a.patches.erase(std::unique(a.patches.begin(), a.patches.end()), a.patches.end());
    }
    a.op = op();
    a.value = number();
    return a;
  }

  std::string_view s_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

std::vector<std::size_t> atom_patches(const Atom& a, std::size_t n) {
  if (!a.patches.empty()) return a.patches;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return all;
}

std::vector<double> flowed(const NetworkModel& model, std::span<const double> x0, double t) {
  std::vector<double> x(x0.begin(), x0.end());
  flow_in_place(model, x, t);
  return x;
}

// Times in (0, dt) where the truth value of some atom may change.
std::vector<double> breakpoints(const NetworkModel& model, std::span<const double> x0, double dt,
                                const Predicate& pred) {
  std::vector<double> bp{0.0, dt};
  const std::size_t n = model.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (auto r = flow_coordinate(model.growth(i), x0[i], dt); r.drain_time && *r.drain_time < dt) {
      bp.push_back(*r.drain_time);
    }
  }
  for (const Atom& a : pred.atoms()) {
    const auto patches = atom_patches(a, n);
    if (a.agg != Aggregate::Sum || patches.size() == 1) {
      for (std::size_t i : patches) {
        if (auto t = coordinate_crossing(model.growth(i), x0[i], dt, a.value)) bp.push_back(*t);
      }
      continue;
    }
    auto sum_at = [&](double t) {
      const auto x = flowed(model, x0, t);
      double s = 0.0;
      for (std::size_t i : patches) s += x[i];
      return s - a.value;
    };
    const bool linear = std::all_of(patches.begin(), patches.end(),
                                    [&](std::size_t i) { return has_linear_flow(model.growth(i)); });
    std::vector<double> nodes;
    if (linear) {
      // piecewise linear in t with kinks at drains
      nodes = {0.0, dt};
      for (std::size_t i : patches) {
        if (auto r = flow_coordinate(model.growth(i), x0[i], dt); r.drain_time && *r.drain_time < dt) {
          nodes.push_back(*r.drain_time);
        }
      }
      std::sort(nodes.begin(), nodes.end());
    } else {
      constexpr int kGrid = 64;
      for (int k = 0; k <= kGrid; ++k) nodes.push_back(dt * k / kGrid);
    }
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const double t0 = nodes[k];
      const double t1 = nodes[k + 1];
      const double f0 = sum_at(t0);
      const double f1 = sum_at(t1);
      if (f0 == 0.0) bp.push_back(t0);
      if ((f0 < 0.0) == (f1 < 0.0) || f1 == 0.0) continue;
      if (linear) {
        bp.push_back(t0 + (t1 - t0) * f0 / (f0 - f1));
        continue;
      }
      double lo = t0;
      double hi = t1;
      for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, dt); ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((sum_at(mid) < 0.0) == (f0 < 0.0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      bp.push_back(hi);
    }
  }
  for (double& t : bp) t = std::clamp(t, 0.0, dt);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

}  // namespace

Predicate Predicate::parse(std::string_view text, std::size_t n) { return Parser(text, n).run(); }

bool Predicate::operator()(std::span<const double> x) const {
  return std::all_of(atoms_.begin(), atoms_.end(),
                     [&](const Atom& a) { return compare(aggregate(a, x), a.op, a.value); });
}

std::string Predicate::to_string() const {
  if (atoms_.empty()) return "true";
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const Atom& a = atoms_[k];
    if (k) os << " && ";
    if (a.agg == Aggregate::Min && a.patches.size() == 1) {
      os << 'x' << a.patches[0] + 1;
    } else {
      os << (a.agg == Aggregate::Min ? "min" : a.agg == Aggregate::Max ? "max" : "sum");
      if (!a.patches.empty()) {
        os << '(';
        for (std::size_t i = 0; i < a.patches.size(); ++i) os << (i ? "," : "") << a.patches[i] + 1;
        os << ')';
      }
    }
    os << ' ' << op_text(a.op) << ' ' << a.value;
  }
  return os.str();
}

bool Predicate::is_region() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) {
    if (a.op != Compare::Ge) return false;
    return a.agg == Aggregate::Min || (a.agg == Aggregate::Sum && a.patches.empty());
  });
}

double segment_time_in_set(const NetworkModel& model, std::span<const double> x0, double dt,
                           const Predicate& pred) {
  if (dt < 0.0) throw ContractViolation("segment duration must be >= 0");
  if (dt == 0.0) return 0.0;
  if (pred.atoms().empty()) return dt;
  const auto bp = breakpoints(model, x0, dt, pred);
  double inside = 0.0;
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k];
    const double b = bp[k + 1];
    if (b <= a) continue;
    if (pred(flowed(model, x0, 0.5 * (a + b)))) inside += b - a;
  }
  return std::min(inside, dt);
}

std::optional<double> segment_first_entry(const NetworkModel& model, std::span<const double> x0, double dt,
                                          const Predicate& pred) {
  if (dt < 0.0) throw ContractViolation("segment duration must be >= 0");
  if (pred(x0)) return 0.0;
  if (dt == 0.0) return std::nullopt;
  const auto bp = breakpoints(model, x0, dt, pred);
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k];
    const double b = bp[k + 1];
    if (k > 0 && pred(flowed(model, x0, a))) return a;
    if (b > a && pred(flowed(model, x0, 0.5 * (a + b)))) return a;
  }
  if (pred(flowed(model, x0, dt))) return dt;
  return std::nullopt;
}

}  // namespace pdmp
