// Command-line driver: run an experiment config, list examples, validate a config.

#include <iostream>

#include "CLI11.hpp"
#include "psmc/experiment.hpp"

namespace {

// A config that cannot be read is reported the same way as one that does not validate.
psmc::ExperimentConfig load(const std::string& path) {
  try {
    return psmc::load_config(path);
  } catch (const psmc::IoError& e) {
    throw psmc::ConfigurationError(e.what());
  }
}

int run(const std::string& path, const std::string& out_override, bool quiet) {
  psmc::ExperimentConfig config = load(path);
  if (!out_override.empty()) config.output_dir = out_override;
  const psmc::ExperimentResult result = psmc::run_experiment(config);
  if (!quiet) std::cout << result.table.to_csv();
  if (!config.output_dir.empty()) {
    psmc::write_outputs(result, config.output_dir);
    if (!quiet) std::cerr << "wrote " << config.output_dir << "\n";
  }
  for (const auto& row : result.table.rows) {
    if (!row.ok) {
      std::cerr << "K=" << row.K << " " << row.method << " failed: " << row.error << "\n";
    }
  }
  return result.table.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embarrassingly parallel MCMC: subposterior recentring and consensus baselines"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run_cmd->add_option("config", config_path, "Config file")->required();
  run_cmd->add_option("-o,--output-dir", out_dir, "Override output_dir from the config");
  run_cmd->add_flag("-q,--quiet", quiet, "Do not print the result table");

  auto* list_cmd = app.add_subcommand("list-examples", "List the built-in examples");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate-config", "Check a config without running it");
  validate_cmd->add_option("config", validate_path, "Config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, out_dir, quiet);
    if (*list_cmd) {
      for (auto id : psmc::all_examples()) {
        std::cout << psmc::to_string(id) << "\t" << psmc::describe(id) << "\n";
      }
      return 0;
    }
    if (*validate_cmd) {
      const psmc::ExperimentConfig c = load(validate_path);
      std::cout << psmc::to_json(c).dump(2) << "\n";
      return 0;
    }
  } catch (const psmc::ConfigurationError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
