#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pdmp/model.hpp"

namespace pdmp {

struct ParamSlot {
  std::string name;
  std::string description;
  nlohmann::json default_value;
};

struct BuiltinInfo {
  std::string name;
  std::string description;
  std::vector<ParamSlot> params;
};

/// Stable catalog, in declaration order.
const std::vector<BuiltinInfo>& list_builtin_models();

/// Instantiates a built-in. `params` is an object whose keys must be slots of
/// that built-in; missing slots take their defaults. Throws ConfigError on
/// unknown names, unknown slots or ill-typed values.
NetworkModel make_builtin(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

}  // namespace pdmp
