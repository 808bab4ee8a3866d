// Batch experiment front end: JSON configuration, schema validation, named
// experiment runners and deterministic CSV / JSON-lines output.

#pragma once

#include "cvqss/erasure.hpp"
#include "cvqss/protocol.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cvqss {

struct SigmaRange {
  double lo = 0.5;
  double hi = 8.0;
  int n = 100;
};

struct ExperimentConfig {
  DeviceModel device;
  std::string device_preset = "ideal";

  std::string experiment = "fig2-sweep";
  std::vector<double> s_list = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double s_db = 6.0;
  double g_db = 8.0;
  double alpha_sq = 1.3;
  double sigma_sq = 3.0;
  double sigma_ens_sq = 3.0;
  SigmaRange sigma_range;
  AdvantageGrid grid;
  long samples = 0;  // 0 = exact moments; > 0 emulates finite averaging

  std::string output_dir = ".";
  std::string output_format = "csv";  // csv | jsonl
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
};

struct ValidationReport {
  std::vector<std::string> violations;  // each names the offending field
  std::vector<std::string> notes;       // defaults applied, etc.

  bool ok() const { return violations.empty(); }
};

/// Parse a configuration document (JSON). Throws std::runtime_error on
/// malformed JSON; unknown/invalid values surface via validate_config.
ExperimentConfig parse_config(const std::string& json_text);

/// Schema and range checks without running; never throws on content
/// problems, always returns the full list of violations.
ValidationReport validate_config(const std::string& json_text);

/// Registered experiment names with one-line descriptions.
std::vector<std::pair<std::string, std::string>> list_experiments();

/// Run the configured experiment; returns the paths written.
/// Output is byte-identical for identical config + seed.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

/// Serialize one experiment to a string (the file content run_experiment
/// writes); exposed for determinism tests.
std::string render_experiment(const ExperimentConfig& config);

}  // namespace cvqss
