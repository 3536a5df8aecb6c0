#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "pdmp/builtins.hpp"
#include "pdmp/scenario.hpp"

namespace {

void print_catalog(std::ostream& os) {
  for (const auto& b : pdmp::list_builtin_models()) {
    os << b.name << "\n  " << b.description << "\n";
    for (const auto& p : b.params) os << "    " << p.name << " = " << p.default_value.dump() << "  (" << p.description << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded experiments on piecewise deterministic metapopulation networks"};
  std::string scenario;
  bool list_models = false;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  double t_end = 0.0;
  std::string out;
  pdmp::ReportFormat format = pdmp::ReportFormat::Structured;
  const std::map<std::string, pdmp::ReportFormat> formats{{"delimited", pdmp::ReportFormat::Delimited},
                                                          {"structured", pdmp::ReportFormat::Structured}};

  app.add_option("scenario", scenario, "scenario file (JSON)");
  app.add_flag("--list-models", list_models, "print the built-in model catalog and exit");
  auto* seed_opt = app.add_option("--seed", seed, "override the scenario seed");
  auto* rep_opt = app.add_option("--replicas", replicas, "override the replica count")->check(CLI::PositiveNumber);
  auto* t_opt = app.add_option("--t-end", t_end, "override the horizon")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out, "output directory (default: $PDMPNET_OUT_ROOT/<scenario stem>)");
  app.add_option("--format", format, "report format")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pdmp::kExitConfig;
  }
  if (list_models) {
    print_catalog(std::cout);
    return pdmp::kExitOk;
  }
  if (scenario.empty()) {
    std::cerr << "config error: a scenario file is required\n";
    return pdmp::kExitConfig;
  }
  pdmp::Overrides ov;
  ov.format = format;
  if (*seed_opt) ov.seed = seed;
  if (*rep_opt) ov.replicas = replicas;
  if (*t_opt) ov.t_end = t_end;
  if (*out_opt) ov.out = out;
  return pdmp::run_scenario(scenario, ov, std::cerr);
}
