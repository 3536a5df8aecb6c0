#include "pdmp/builtins.hpp"

#include <algorithm>
#include <cmath>

#include "pdmp/errors.hpp"

namespace pdmp {

using nlohmann::json;

namespace {

PatchClass class_of(double c) {
  if (c > 0.0) return PatchClass::Source;
  if (c < 0.0) return PatchClass::Sink;
  return PatchClass::Neutral;
}

class Slots {
 public:
  Slots(const BuiltinInfo& info, const json& params) : info_(info), params_(params) {
    if (!params.is_object()) throw ConfigError(info.name + ": parameters must be an object");
    for (const auto& [key, _] : params.items()) {
      const bool known = std::any_of(info.params.begin(), info.params.end(),
                                     [&](const ParamSlot& s) { return s.name == key; });
      if (!known) throw ConfigError(info.name + ": unknown parameter '" + key + "'");
    }
  }

  const json& get(const std::string& key) const {
    if (params_.contains(key)) return params_.at(key);
    for (const auto& s : info_.params) {
      if (s.name == key) return s.default_value;
    }
    throw InternalError("slot " + key + " missing from catalog");
  }

  double number(const std::string& key) const {
    const auto& v = get(key);
    if (!v.is_number()) throw ConfigError(info_.name + ": '" + key + "' must be a number");
    return v.get<double>();
  }

  std::vector<double> vector(const std::string& key) const {
    const auto& v = get(key);
    if (!v.is_array() || v.empty()) throw ConfigError(info_.name + ": '" + key + "' must be a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(info_.name + ": '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  // "complete" or a list of 1-based [from, to] pairs.
  std::vector<Edge> edges(const std::string& key, std::size_t n) const {
    const auto& v = get(key);
    std::vector<Edge> out;
    if (v.is_string() && v.get<std::string>() == "complete") {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) out.push_back({i, j});
        }
      }
      return out;
    }
    if (!v.is_array()) throw ConfigError(info_.name + ": '" + key + "' must be \"complete\" or a list of pairs");
    for (const auto& p : v) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
        throw ConfigError(info_.name + ": edges must be [from, to] integer pairs");
      }
      const auto a = p[0].get<long long>();
      const auto b = p[1].get<long long>();
      if (a < 1 || b < 1 || a > static_cast<long long>(n) || b > static_cast<long long>(n) || a == b) {
        throw ConfigError(info_.name + ": edge [" + std::to_string(a) + ", " + std::to_string(b) +
                          "] does not name two distinct patches");
      }
      out.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)});
    }
    return out;
  }

  // A scalar rate for every edge, or an n × n matrix.
  double rate(const std::string& key, Edge e, std::size_t n) const {
    const auto& v = get(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == n && v[e.from].is_array() && v[e.from].size() == n &&
        v[e.from][e.to].is_number()) {
      return v[e.from][e.to].get<double>();
    }
    throw ConfigError(info_.name + ": '" + key + "' must be a number or an n x n matrix");
  }

 private:
  const BuiltinInfo& info_;
  const json& params_;
};

std::vector<Edge> pairs(std::initializer_list<std::pair<int, int>> ps) {
  std::vector<Edge> out;
  for (auto [a, b] : ps) out.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)});
  return out;
}

NetworkModel constant_model(const std::string& name, const std::vector<double>& c, const std::vector<Edge>& edges,
                            const Slots& s, bool unitary) {
  NetworkModel m(c.size());
  m.name = name;
  for (std::size_t i = 0; i < c.size(); ++i) m.set_patch(i, class_of(c[i]), ConstantGrowth{c[i]});
  for (const Edge e : edges) {
    if (unitary) {
      m.set_transfer(e, PowerLawRate{s.number("alpha")}, UnitDirac{});
    } else {
      m.set_transfer(e, ConstantRate{s.rate("theta", e, c.size())}, UniformFraction{});
    }
  }
  return m;
}

const json kTwoPatchC = json::array({1.0, -2.0});
const json kFourPatchC = json::array({1.0, 2.0, -3.0, -1.0});

}  // namespace

const std::vector<BuiltinInfo>& list_builtin_models() {
  static const std::vector<BuiltinInfo> catalog = {
      {"constant-multiplicative",
       "constant growth c_i, constant rates, uniform fraction of the origin moved",
       {{"c", "growth constant per patch; the sign sets the class", kTwoPatchC},
        {"theta", "rate on every edge, or an n x n matrix", 1.0},
        {"edges", "\"complete\" or a list of [from, to] pairs", "complete"}}},
      {"constant-unitary",
       "constant growth c_i, rates (1 v x_i)^alpha, one unit moved per jump",
       {{"c", "growth constant per patch; the sign sets the class", kTwoPatchC},
        {"alpha", "power-law rate exponent in (0, 1]", 1.0},
        {"edges", "\"complete\" or a list of [from, to] pairs", "complete"}}},
      {"logistic-unitary",
       "logistic sources, saturating sinks, carrying-capacity rates from every source to every sink",
       {{"sources", "list of {alpha, beta, c} for the logistic sources",
         json::array({{{"alpha", 0.1}, {"beta", 5.0}, {"c", 0.5}}, {{"alpha", 0.1}, {"beta", 5.0}, {"c", 0.5}}})},
        {"sinks", "list of {c, alpha}; sink growth is -c x/(alpha + x)", json::array({{{"c", 2.0}, {"alpha", 1.0}}})},
        {"gamma", "rate scale", 1.0},
        {"eps", "numerator offset of the target factor", 1.0},
        {"eps_prime", "denominator offset of the target factor", 2.0}}},
      {"exit-tree",
       "six patches: sources 1-2, neutral 3-4, sinks 5-6, every patch reaches a sink",
       {{"c", "growth constants (two positive, two zero, two negative)",
         json::array({1.0, 1.0, 0.0, 0.0, -2.0, -2.0})},
        {"theta", "rate on every edge", 1.0}}},
      {"crossed-pair",
       "two sources, two sinks, each source feeding a different sink, sinks exchanging",
       {{"c", "growth constants (two positive, two negative)", kFourPatchC}, {"theta", "rate on every edge", 1.0}}},
      {"trapped-pair",
       "two sources, two sinks; patches 2 and 4 form a closed pair that cannot reach sink 3",
       {{"c", "growth constants (two positive, two negative)", kFourPatchC}, {"theta", "rate on every edge", 1.0}}},
      {"linear-restoring",
       "growth a_i - x_i, unit rates on the complete graph, mean moved fraction m_i",
       {{"a", "restoring level per patch (>= 0)", json::array({1.0, 2.0})},
        {"m", "mean moved fraction per patch, in [0, 1]", json::array({0.3, 0.6})}}},
  };
  return catalog;
}

NetworkModel make_builtin(const std::string& name, const json& params) {
  const auto& cat = list_builtin_models();
  const auto it = std::find_if(cat.begin(), cat.end(), [&](const BuiltinInfo& b) { return b.name == name; });
  if (it == cat.end()) throw ConfigError("unknown built-in model '" + name + "'");
  const Slots s(*it, params);

  if (name == "constant-multiplicative" || name == "constant-unitary") {
    const auto c = s.vector("c");
    return constant_model(name, c, s.edges("edges", c.size()), s, name == "constant-unitary");
  }
  if (name == "exit-tree" || name == "crossed-pair" || name == "trapped-pair") {
    const auto c = s.vector("c");
    const std::size_t want = name == "exit-tree" ? 6 : 4;
    if (c.size() != want) throw ConfigError(name + ": 'c' must have " + std::to_string(want) + " entries");
    std::vector<Edge> edges;
    if (name == "exit-tree") {
      edges = pairs({{2, 1}, {3, 1}, {4, 1}, {1, 5}, {5, 6}, {6, 2}, {2, 3}, {1, 4}});
    } else if (name == "crossed-pair") {
      edges = pairs({{1, 3}, {2, 4}, {3, 4}, {4, 3}, {3, 1}, {4, 2}, {1, 2}, {2, 1}});
    } else {
      edges = pairs({{1, 3}, {3, 1}, {1, 2}, {3, 4}, {2, 4}, {4, 2}});
    }
    return constant_model(name, c, edges, s, false);
  }
  if (name == "logistic-unitary") {
    const auto& src = s.get("sources");
    const auto& snk = s.get("sinks");
    if (!src.is_array() || !snk.is_array() || src.empty() || snk.empty()) {
      throw ConfigError(name + ": 'sources' and 'sinks' must be non-empty arrays");
    }
    auto field = [&](const json& o, const char* key) {
      if (!o.is_object() || !o.contains(key) || !o.at(key).is_number()) {
        throw ConfigError(name + ": every entry needs a numeric '" + key + "'");
      }
      for (const auto& [k, _] : o.items()) {
        if (k != "alpha" && k != "beta" && k != "c") throw ConfigError(name + ": unknown key '" + k + "'");
      }
      return o.at(key).get<double>();
    };
    const std::size_t ns = src.size();
    NetworkModel m(ns + snk.size());
    m.name = name;
    for (std::size_t i = 0; i < ns; ++i) {
      m.set_patch(i, PatchClass::Source,
                  LogisticGrowth{field(src[i], "alpha"), field(src[i], "beta"), field(src[i], "c")});
    }
    for (std::size_t j = 0; j < snk.size(); ++j) {
      m.set_patch(ns + j, PatchClass::Sink, SinkReleaseGrowth{field(snk[j], "c"), field(snk[j], "alpha")});
    }
    const CoerciveRate rate{s.number("gamma"), 0.0, 1.0, s.number("eps"), s.number("eps_prime")};
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t j = ns; j < m.size(); ++j) m.set_transfer({i, j}, rate, UnitDirac{});
    }
    return m;
  }
  // linear-restoring
  const auto a = s.vector("a");
  const auto mv = s.vector("m");
  if (a.size() != mv.size()) throw ConfigError(name + ": 'a' and 'm' must have the same length");
  const std::size_t n = a.size();
  NetworkModel m(n);
  m.name = name;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] >= 0.0)) throw ConfigError(name + ": 'a' entries must be >= 0");
    if (!(mv[i] >= 0.0 && mv[i] <= 1.0)) throw ConfigError(name + ": 'm' entries must lie in [0, 1]");
    m.set_patch(i, a[i] > 0.0 ? PatchClass::Source : PatchClass::Neutral, AffineGrowth{a[i], 1.0});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = mv[i];
    if (mi == 0.0) continue;
    // Uniform on [0, 2m] below one half, on [2m − 1, 1] above; both have mean m.
    const auto law = mi <= 0.5 ? RelativeLaw::uniform(0.0, 2.0 * mi) : RelativeLaw::uniform(2.0 * mi - 1.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) m.set_transfer({i, j}, ConstantRate{1.0}, law);
    }
  }
  return m;
}

}  // namespace pdmp
