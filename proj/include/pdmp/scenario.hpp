#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdmp/analysis.hpp"
#include "pdmp/model.hpp"
#include "pdmp/stability.hpp"

namespace pdmp {

inline constexpr int kScenarioFormatVersion = 1;
inline constexpr const char* kOutRootEnv = "PDMPNET_OUT_ROOT";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitValidation = 3,
  kExitRuntime = 4,
};

enum class ReportFormat { Delimited, Structured };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<double> t_end;
  std::optional<std::filesystem::path> out;
  ReportFormat format = ReportFormat::Structured;
};

struct DriftWalkSpec {
  DriftWalkParams params;
  double r = 1.0;
  double y0 = 10.0;
  double R = 0.0;
  std::size_t steps = 50;
  std::size_t max_steps = 100000;
};

struct Assumption2Spec {
  std::string S = "true";
  std::string S_prime = "true";
  double T = 1.0;
  double T_prime = 1.0;
  double R = 0.0;
};

/// A parsed, fully validated scenario (see README for the file schema).
struct Scenario {
  std::string experiment;
  std::string label;  // scenario file stem
  NetworkModel model;
  std::string model_source;  // built-in name, model file or "inline"
  std::vector<double> x0;
  double t_end = 0.0;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::optional<double> sample_step;
  std::string predicate;
  double burn_in = 0.2;  // fraction of [0, t_end] discarded by path estimators
  std::size_t batches = 20;
  std::optional<double> endpoint_t;
  std::optional<double> t_from;
  std::vector<std::filesystem::path> trajectories;
  std::vector<Trajectory> inputs;  // loaded from `trajectories`
  DriftWalkSpec drift_walk;
  Assumption2Spec assumption2;
  std::filesystem::path out_dir;
  ReportFormat format = ReportFormat::Structured;
};

/// Throws ConfigError for schema violations and ModelValidationError when the
/// model cannot be simulated by a stochastic experiment.
Scenario load_scenario(const std::filesystem::path& path, const Overrides& overrides);
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir, const std::string& label,
                            const Overrides& overrides);

struct OutputFile {
  std::string name;
  std::string content;
};

/// Runs the experiment in memory; nothing is written.
std::vector<OutputFile> execute(const Scenario& s);

/// Writes every file into dir, creating it. On failure removes what was written
/// and throws ConfigError.
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

/// Load, execute and write; maps failures to exit codes and reports them on err.
int run_scenario(const std::filesystem::path& path, const Overrides& overrides, std::ostream& err);

/// Renders an ordered report object in the requested format, headed by its format version.
std::string render_report(const nlohmann::ordered_json& report, ReportFormat format);

}  // namespace pdmp
