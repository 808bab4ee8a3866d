// Command-line front end: run <config>, validate <config>, list.

#include "cvqss/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian three-player secret-sharing simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = -1;
  long long seed = -1;

  CLI::App* run_cmd = app.add_subcommand("run", "run the configured experiment");
  run_cmd->add_option("config", config_path, "path to a JSON config")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
  run_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  run_cmd->add_option("--seed", seed, "sampling seed (overrides config)");

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "check a config without running");
  validate_cmd->add_option("config", validate_path, "path to a JSON config")->required();

  CLI::App* list_cmd = app.add_subcommand("list", "list available experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      for (const auto& [name, description] : cvqss::list_experiments()) {
        std::cout << name << "  -  " << description << '\n';
      }
      return 0;
    }
    if (*validate_cmd) {
      const auto report = cvqss::validate_config(read_file(validate_path));
      for (const auto& note : report.notes) {
        std::cout << "note: " << note << '\n';
      }
      for (const auto& violation : report.violations) {
        std::cout << "violation: " << violation << '\n';
      }
      std::cout << (report.ok() ? "config ok" : "config invalid") << '\n';
      return report.ok() ? 0 : 1;
    }
    // run
    const std::string text = read_file(config_path);
    const auto report = cvqss::validate_config(text);
    if (!report.ok()) {
      for (const auto& violation : report.violations) {
        std::cerr << "violation: " << violation << '\n';
      }
      return 2;
    }
    cvqss::ExperimentConfig config = cvqss::parse_config(text);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (threads >= 0) config.threads = threads;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    for (const auto& path : cvqss::run_experiment(config)) {
      std::cout << path << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
