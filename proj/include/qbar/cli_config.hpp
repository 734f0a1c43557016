#pragma once

#include <filesystem>
#include <vector>

#include "qbar/peqad.hpp"
#include "qbar/synthgen.hpp"

namespace qbar {

/// Fully resolved run configuration: config-file values overlaid with
/// command-line flags (flags win). Unknown config keys are rejected.
struct RunConfig {
  uint64_t dataset_seed = 42;
  DatasetPreset preset;
  AnsatzConfig ansatz;
  TrainConfig train;
  double shrinkage = 1e-3;
  std::vector<uint64_t> eval_seeds = {1, 2, 3, 4, 5};
  std::vector<double> noise_sigmas = {0.0, 0.05, 0.1, 0.2};
  bool gamma_ablation = false;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace qbar
