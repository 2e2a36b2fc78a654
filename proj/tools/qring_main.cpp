// qring: command-line front end for the ring simulator.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qring/error.hpp"
#include "qring/pipeline.hpp"
#include "qring/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string scenario;
  std::string out;
  bool ci_scale = false;
  bool force = false;
  bool quiet = false;
  bool print_scenario = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario,-s", c.scenario, "scenario file or bundled scenario name")->required();
  cmd->add_option("--out,-o", c.out, "output directory (default: $QRING_OUTPUT_ROOT/<name>)");
  cmd->add_flag("--ci-scale", c.ci_scale, "apply the scenario's reduced-resolution block");
  cmd->add_option("--override", c.overrides, "dotted key=value applied after loading (repeatable)");
  cmd->add_flag("--force", c.force, "recompute dipoles even if a matching run exists");
  cmd->add_flag("--quiet,-q", c.quiet, "suppress progress messages");
  cmd->add_flag("--print-scenario", c.print_scenario, "print the resolved scenario and exit");
}

std::filesystem::path output_dir(const Common& c, const qring::Scenario& sc) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("QRING_OUTPUT_ROOT");
  std::filesystem::path base = (root && *root) ? std::filesystem::path(root) : std::filesystem::path("qring-out");
  return base / (sc.resolution == "ci" ? sc.name + "-ci" : sc.name);
}

int run(qring::Stage stage, const Common& c) {
  const auto sc = qring::load_scenario(c.scenario, c.ci_scale, c.overrides);
  if (c.print_scenario) {
    std::cout << qring::to_json(sc).dump(2) << "\n";
    return 0;
  }
  const auto out = output_dir(c, sc);
  qring::RunOptions opts;
  opts.force = c.force;
  if (!c.quiet) opts.log = [](const std::string& m) { std::cerr << "[qring] " << m << std::endl; };
  const auto manifest = qring::run_stage(stage, sc, out, opts);
  std::cout << manifest.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-ring vortex-beam simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QRING_VERSION_STRING);

  struct Entry {
    const char* name;
    const char* help;
    qring::Stage stage;
  };
  const std::vector<Entry> entries{
      {"eigensolve", "stationary levels and occupations", qring::Stage::Eigensolve},
      {"simulate", "propagate and record ring-resolved dipoles", qring::Stage::Simulate},
      {"spectrum", "time-resolved emission spectrum (S0)", qring::Stage::Spectrum},
      {"stokes", "full Stokes spectrograms and line report", qring::Stage::Stokes},
      {"oracle", "first-order selection-rule line predictions", qring::Stage::Oracle},
      {"scan", "band signal versus intensity and topological charge", qring::Stage::Scan},
  };
  std::vector<Common> options(entries.size());
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto* cmd = app.add_subcommand(entries[i].name, entries[i].help);
    add_common(cmd, options[i]);
    commands.push_back(cmd);
  }
  auto* list = app.add_subcommand("list-scenarios", "list bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*list) {
      for (const auto& name : qring::list_bundled_scenarios()) std::cout << name << "\n";
      return 0;
    }
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (*commands[i]) return run(entries[i].stage, options[i]);
  } catch (const qring::Error& e) {
    std::cerr << "qring: " << e.what() << std::endl;
    return e.is_numerical() ? kExitNumerical : kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "qring: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "qring: " << e.what() << std::endl;
    return kExitValidation;
  }
  return 0;
}
