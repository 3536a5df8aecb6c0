#pragma once

#include <filesystem>

#include "json.hpp"
#include "pdmp/model.hpp"

namespace pdmp {

inline constexpr int kModelFormatVersion = 1;

/// Model description object:
///
///   { "format_version": 1, "name": "...", "m_bound": 3.0 (optional),
///     "patches": [ { "class": "source|neutral|sink", "growth": { "type": ..., ... } } ],
///     "edges":   [ { "from": 1, "to": 2, "active": true,
///                    "rate": { "type": ..., ... }, "amplitude": { "type": ..., ... } } ] }
///
/// Patch indices are 1-based. Growth types: constant{c}, logistic{alpha, beta, c},
/// sink_release{c, alpha}, affine{a, b}, tabulated{knots, values}. Rate types: zero,
/// constant{theta}, power_law{alpha}, coercive{gamma, offset, exponent, eps, eps_prime}.
/// Amplitude types: uniform_fraction, unit_dirac, relative{knots, density}.
/// Unknown keys are errors; the model is not validated here.
NetworkModel model_from_json(const nlohmann::json& j);

/// Throws ConfigError for custom quantile amplitudes, which have no file form.
nlohmann::json model_to_json(const NetworkModel& model);

NetworkModel read_model_file(const std::filesystem::path& path);

}  // namespace pdmp
