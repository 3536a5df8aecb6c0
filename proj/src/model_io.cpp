#include "pdmp/model_io.hpp"

#include <fstream>
#include <set>

#include "pdmp/errors.hpp"

namespace pdmp {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_keys(const json& o, const std::string& where, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  if (!o.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!o.contains(k)) throw ConfigError(where + ": missing key '" + k + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [k, _] : o.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

double num(const json& o, const char* key, const std::string& where) {
  const auto& v = o.at(key);
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> nums(const json& o, const char* key, const std::string& where) {
  const auto& v = o.at(key);
  if (!v.is_array()) throw ConfigError(where + ": '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + ": '" + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string type_of(const json& o, const std::string& where) {
  if (!o.is_object() || !o.contains("type") || !o.at("type").is_string()) {
    throw ConfigError(where + ": needs a string 'type'");
  }
  return o.at("type").get<std::string>();
}

Growth parse_growth(const json& g, const std::string& where) {
  const auto t = type_of(g, where);
  if (t == "constant") {
    require_keys(g, where, {"type", "c"});
    return ConstantGrowth{num(g, "c", where)};
  }
  if (t == "logistic") {
    require_keys(g, where, {"type", "alpha", "beta", "c"});
    return LogisticGrowth{num(g, "alpha", where), num(g, "beta", where), num(g, "c", where)};
  }
  if (t == "sink_release") {
    require_keys(g, where, {"type", "c", "alpha"});
    return SinkReleaseGrowth{num(g, "c", where), num(g, "alpha", where)};
  }
  if (t == "affine") {
    require_keys(g, where, {"type", "a", "b"});
    return AffineGrowth{num(g, "a", where), num(g, "b", where)};
  }
  if (t == "tabulated") {
    require_keys(g, where, {"type", "knots", "values"});
    return TabulatedGrowth{nums(g, "knots", where), nums(g, "values", where)};
  }
  throw ConfigError(where + ": unknown growth type '" + t + "'");
}

Rate parse_rate(const json& r, const std::string& where) {
  const auto t = type_of(r, where);
  if (t == "zero") {
    require_keys(r, where, {"type"});
    return ZeroRate{};
  }
  if (t == "constant") {
    require_keys(r, where, {"type", "theta"});
    return ConstantRate{num(r, "theta", where)};
  }
  if (t == "power_law") {
    require_keys(r, where, {"type", "alpha"});
    return PowerLawRate{num(r, "alpha", where)};
  }
  if (t == "coercive") {
    require_keys(r, where, {"type", "gamma", "offset", "exponent", "eps", "eps_prime"});
    return CoerciveRate{num(r, "gamma", where), num(r, "offset", where), num(r, "exponent", where),
                        num(r, "eps", where), num(r, "eps_prime", where)};
  }
  throw ConfigError(where + ": unknown rate type '" + t + "'");
}

Amplitude parse_amplitude(const json& a, const std::string& where) {
  const auto t = type_of(a, where);
  if (t == "uniform_fraction") {
    require_keys(a, where, {"type"});
    return UniformFraction{};
  }
  if (t == "unit_dirac") {
    require_keys(a, where, {"type"});
    return UnitDirac{};
  }
  if (t == "relative") {
    require_keys(a, where, {"type", "knots", "density"});
    try {
      return RelativeLaw(nums(a, "knots", where), nums(a, "density", where));
    } catch (const ContractViolation& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(where + ": unknown amplitude type '" + t + "'");
}

PatchClass parse_class(const json& c, const std::string& where) {
  if (c == "source") return PatchClass::Source;
  if (c == "neutral") return PatchClass::Neutral;
  if (c == "sink") return PatchClass::Sink;
  throw ConfigError(where + ": class must be source, neutral or sink");
}

std::size_t parse_index(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": patch index must be an integer");
  const auto k = v.get<long long>();
  if (k < 1 || k > static_cast<long long>(n)) {
    throw ConfigError(where + ": patch index " + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  return static_cast<std::size_t>(k - 1);
}

}  // namespace

NetworkModel model_from_json(const json& j) {
  require_keys(j, "model", {"format_version", "patches", "edges"}, {"name", "m_bound"});
  if (!j.at("format_version").is_number_integer() || j.at("format_version").get<int>() != kModelFormatVersion) {
    throw ConfigError("model: unsupported format_version (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const auto& patches = j.at("patches");
  if (!patches.is_array() || patches.empty()) throw ConfigError("model: 'patches' must be a non-empty array");
  NetworkModel m(patches.size());
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("model: 'name' must be a string");
    m.name = j.at("name").get<std::string>();
  }
  if (j.contains("m_bound")) m.set_m_bound(num(j, "m_bound", "model"));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto where = "patch " + std::to_string(i + 1);
    require_keys(patches[i], where, {"class", "growth"});
    m.set_patch(i, parse_class(patches[i].at("class"), where), parse_growth(patches[i].at("growth"), where));
  }
  const auto& edges = j.at("edges");
  if (!edges.is_array()) throw ConfigError("model: 'edges' must be an array");
  std::set<Edge> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto where = "edge entry " + std::to_string(k + 1);
    const auto& e = edges[k];
    require_keys(e, where, {"from", "to", "rate", "amplitude"}, {"active"});
    const Edge edge{parse_index(e.at("from"), m.size(), where), parse_index(e.at("to"), m.size(), where)};
    if (edge.from == edge.to) throw ConfigError(where + ": self-loops are not allowed");
    if (!seen.insert(edge).second) throw ConfigError(where + ": duplicate edge");
    bool active = true;
    if (e.contains("active")) {
      if (!e.at("active").is_boolean()) throw ConfigError(where + ": 'active' must be a boolean");
      active = e.at("active").get<bool>();
    }
    m.set_transfer(edge, parse_rate(e.at("rate"), where), parse_amplitude(e.at("amplitude"), where), active);
  }
  return m;
}

json model_to_json(const NetworkModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["name"] = model.name;
  if (model.supplied_m_bound()) j["m_bound"] = *model.supplied_m_bound();
  json patches = json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    json g = std::visit(Overloaded{
                            [](const ConstantGrowth& c) { return json{{"type", "constant"}, {"c", c.c}}; },
                            [](const LogisticGrowth& l) {
                              return json{{"type", "logistic"}, {"alpha", l.alpha}, {"beta", l.beta}, {"c", l.c}};
                            },
                            [](const SinkReleaseGrowth& s) {
                              return json{{"type", "sink_release"}, {"c", s.c}, {"alpha", s.alpha}};
                            },
                            [](const AffineGrowth& a) { return json{{"type", "affine"}, {"a", a.a}, {"b", a.b}}; },
                            [](const TabulatedGrowth& t) {
                              return json{{"type", "tabulated"}, {"knots", t.knots}, {"values", t.values}};
                            },
                        },
                        model.growth(i));
    patches.push_back({{"class", std::string(to_string(model.patch_class(i)))}, {"growth", g}});
  }
  j["patches"] = patches;

  std::set<Edge> listed;
  for (const Edge e : model.live_edges()) listed.insert(e);
  for (const Edge e : model.active_edges()) listed.insert(e);
  json edges = json::array();
  for (const Edge e : listed) {
    const auto& tr = model.transfer(e);
    json r = std::visit(Overloaded{
                            [](const ZeroRate&) { return json{{"type", "zero"}}; },
                            [](const ConstantRate& c) { return json{{"type", "constant"}, {"theta", c.theta}}; },
                            [](const PowerLawRate& p) { return json{{"type", "power_law"}, {"alpha", p.alpha}}; },
                            [](const CoerciveRate& c) {
                              return json{{"type", "coercive"}, {"gamma", c.gamma},      {"offset", c.offset},
                                          {"exponent", c.exponent}, {"eps", c.eps}, {"eps_prime", c.eps_prime}};
                            },
                        },
                        tr.rate);
    json a = std::visit(Overloaded{
                            [](const UniformFraction&) { return json{{"type", "uniform_fraction"}}; },
                            [](const UnitDirac&) { return json{{"type", "unit_dirac"}}; },
                            [](const RelativeLaw& l) {
                              return json{{"type", "relative"}, {"knots", l.knots()}, {"density", l.density()}};
                            },
                            [](const CustomQuantile& c) -> json {
                              throw ConfigError("custom quantile '" + c.label + "' has no file form");
                            },
                        },
                        tr.amplitude);
    edges.push_back({{"from", e.from + 1}, {"to", e.to + 1}, {"active", model.is_active(e)}, {"rate", r},
                     {"amplitude", a}});
  }
  j["edges"] = edges;
  return j;
}

NetworkModel read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read model file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace pdmp
