#include <string>

#include "CLI11.hpp"
#include "retflow/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"retflow: one-dimensional viscoelastic balance-law solver"};
  app.require_subcommand(1);

  std::string config, out_dir = ".";
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario config");
  run->add_option("config", config, "Scenario config file")->required();
  run->add_option("--out-dir", out_dir, "Directory for output files")
      ->capture_default_str();
  run->add_flag("--quiet", quiet, "Suppress informational output");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep config");
  sweep->add_option("config", config, "Sweep config file")->required();
  sweep->add_option("--out-dir", out_dir, "Directory for output files")
      ->capture_default_str();
  sweep->add_flag("--quiet", quiet, "Suppress informational output");

  CLI11_PARSE(app, argc, argv);

  if (sweep->parsed()) {
    retflow::ScenarioConfig cfg;
    try {
      cfg = retflow::load_scenario(config);
    } catch (const retflow::ConfigError& e) {
      for (const auto& msg : e.messages()) fprintf(stderr, "%s\n", msg.c_str());
      return 2;
    }
    if (cfg.kind != retflow::ScenarioKind::kSweep) {
      fprintf(stderr, "%s: the sweep subcommand needs kind = sweep\n",
              config.c_str());
      return 2;
    }
  }
  return retflow::run_scenario_file(config, out_dir, quiet);
}
