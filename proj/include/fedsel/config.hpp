#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "fedsel/experiments.hpp"
#include "fedsel/spectrum.hpp"

namespace fedsel {

/// Resource-block allocation study settings.
struct SpectrumStudyConfig {
  spectrum::SpectrumConfig env;
  spectrum::WorkloadConfig workload;
  spectrum::QHyperParams hyper;
  int expected_concurrency = 4;  // k for the equal_share baseline
  int eval_episodes = 10;
  std::uint64_t seed = 1;
};

/// Everything a config file can hold. Every key is optional; absent keys keep
/// the reference defaults.
struct FileConfig {
  ExperimentConfig experiment;
  std::vector<double> lmax_grid = default_lmax_grid();
  std::vector<double> devices_grid = default_devices_grid();
  SpectrumStudyConfig spectrum;
};

FileConfig default_file_config();

/// Throws ConfigError on unknown keys, wrong types, or invalid values.
FileConfig parse_config(const nlohmann::json& doc);

/// Throws ConfigError when the file is missing, unreadable, or malformed.
FileConfig load_config(const std::filesystem::path& path);

}  // namespace fedsel
