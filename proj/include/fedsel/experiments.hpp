#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedsel/linkbudget.hpp"
#include "fedsel/population.hpp"
#include "fedsel/selection.hpp"

namespace fedsel {

enum class Algorithm { Greedy, BestSinr, DpOracle };

std::string_view to_string(Algorithm algorithm);
/// Throws std::invalid_argument on an unknown name.
Algorithm parse_algorithm(std::string_view name);

/// Raised for configurations that cannot be run.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSweepLmax = "l_max_bytes";
inline constexpr std::string_view kSweepDevices = "n_devices";

struct SweepSpec {
  std::string parameter{kSweepLmax};
  std::vector<double> grid;
};

struct ExperimentConfig {
  PopulationConfig population;
  RadioParams radio;
  double t_upd_s = 0.12;
  std::int64_t l_max_bytes = 1'000'000;
  std::vector<Algorithm> algorithms{Algorithm::Greedy, Algorithm::BestSinr};
  SweepSpec sweep;
  std::vector<std::uint64_t> seeds;
  std::int64_t dp_quantum_bytes = 1000;
  std::int64_t dp_max_cells = kDefaultDpMaxCells;
  // Measuring wall time makes output vary run to run, so it is opt-in.
  bool record_wall_time = false;
  int jobs = 1;

  void validate() const;
};

/// Default grids bracketing the reference operating point.
std::vector<double> default_lmax_grid();    // 0.2 .. 2.0 MB
std::vector<double> default_devices_grid(); // 100 .. 800
std::vector<std::uint64_t> default_seeds(); // 1 .. 30

struct MetricsRow {
  Algorithm algorithm = Algorithm::Greedy;
  std::string sweep_param;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double objective = 0.0;
  std::int64_t total_sensed_bytes = 0;
  std::int64_t total_update_bytes = 0;
  int n_selected = 0;
  int n_feasible = 0;
  double wall_time_ms = 0.0;
};

/// A solver run that was refused (DP work bound), kept for the output log.
struct SkippedRun {
  Algorithm algorithm = Algorithm::Greedy;
  std::string sweep_param;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  std::string reason;
};

struct RunOutput {
  std::vector<MetricsRow> rows;
  std::vector<SkippedRun> skipped;
};

/// Uplink budgets from each device to the edge server at the square's centre.
std::vector<LinkBudget> link_budgets(std::span<const Device> devices, const PopulationConfig& population,
                                     const RadioParams& radio);

/// Builds the round's selection instance from a sampled population.
SelectionInstance build_instance(std::span<const Device> devices, const ExperimentConfig& config,
                                 std::int64_t capacity_bytes);

/// One round at the config's operating point: one row per requested algorithm.
RunOutput run_round(const ExperimentConfig& config, std::uint64_t seed);

/// Grid x seeds x algorithms. Rows come back sorted by (sweep value, seed,
/// algorithm) whatever the worker count. Throws ConfigError for an unknown
/// sweep parameter.
RunOutput sweep(const ExperimentConfig& config);

struct SummaryRow {
  Algorithm algorithm = Algorithm::Greedy;
  std::string sweep_param;
  double sweep_value = 0.0;
  int count = 0;
  double objective_mean = 0.0;
  double objective_sd = 0.0;
  double sensed_mean = 0.0;
  double sensed_sd = 0.0;
  double n_selected_mean = 0.0;
  double n_feasible_mean = 0.0;
};

/// Mean and population standard deviation per (algorithm, sweep value).
/// Throws std::domain_error on empty input.
std::vector<SummaryRow> summarize(std::span<const MetricsRow> rows);

enum class PlotMetric { Objective, SensedBytes };

/// Writes an SVG line chart, one polyline per algorithm. Throws
/// std::domain_error on an empty summary and std::runtime_error when the
/// file cannot be written.
void emit_plot(std::span<const SummaryRow> summary, PlotMetric metric, const std::filesystem::path& path);
std::string render_plot_svg(std::span<const SummaryRow> summary, PlotMetric metric);

std::string_view metrics_csv_header();
/// Header line, rows, then one `#` comment per skipped run. `provenance`
/// lines are written first, each prefixed with `# `.
void write_metrics_csv(std::ostream& out, const RunOutput& output, std::span<const std::string> provenance = {});
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> summary);

}  // namespace fedsel
