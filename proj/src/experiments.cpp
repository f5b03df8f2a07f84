#include "fedsel/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "fedsel/format.hpp"

namespace fedsel {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Greedy:
      return "greedy";
    case Algorithm::BestSinr:
      return "best_sinr";
    case Algorithm::DpOracle:
      return "dp_oracle";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "greedy") return Algorithm::Greedy;
  if (name == "best_sinr") return Algorithm::BestSinr;
  if (name == "dp_oracle") return Algorithm::DpOracle;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

std::vector<double> default_lmax_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(200'000.0 * i);
  return grid;
}

std::vector<double> default_devices_grid() {
  std::vector<double> grid;
  for (int n = 100; n <= 800; n += 100) grid.push_back(n);
  return grid;
}

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 30; ++s) seeds.push_back(s);
  return seeds;
}

void ExperimentConfig::validate() const {
  try {
    population.validate();
    radio.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(t_upd_s > 0.0)) throw ConfigError("t_upd_s must be positive");
  if (l_max_bytes < 0) throw ConfigError("l_max_bytes must be >= 0");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (dp_quantum_bytes < 1) throw ConfigError("dp quantum_bytes must be >= 1");
  if (dp_max_cells < 1) throw ConfigError("dp max_cells must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

std::vector<LinkBudget> link_budgets(std::span<const Device> devices, const PopulationConfig& population,
                                     const RadioParams& radio) {
  const auto server = population.server_position();
  std::vector<LinkBudget> links;
  links.reserve(devices.size());
  for (const auto& d : devices) links.push_back(link_budget(distance_km(d.position, server), radio));
  return links;
}

SelectionInstance build_instance(std::span<const Device> devices, const ExperimentConfig& config,
                                 std::int64_t capacity_bytes) {
  const auto links = link_budgets(devices, config.population, config.radio);
  return feasible_filter(devices, links, config.population.computational_intensity, config.t_upd_s,
                         capacity_bytes);
}

namespace {

struct Context {
  std::string_view param;
  double value;
  std::uint64_t seed;
};

void solve_all(const ExperimentConfig& config, const SelectionInstance& instance, const Context& ctx,
               RunOutput& out) {
  for (const auto algorithm : config.algorithms) {
    const auto start = std::chrono::steady_clock::now();
    SelectionResult result;
    try {
      switch (algorithm) {
        case Algorithm::Greedy:
          result = greedy_select(instance);
          break;
        case Algorithm::BestSinr:
          result = best_sinr_select(instance);
          break;
        case Algorithm::DpOracle:
          result = dp_optimal_select(instance, config.dp_quantum_bytes, config.dp_max_cells);
          break;
      }
    } catch (const WorkBoundExceeded& e) {
      out.skipped.push_back({algorithm, std::string(ctx.param), ctx.value, ctx.seed, e.what()});
      continue;
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;

    MetricsRow row;
    row.algorithm = algorithm;
    row.sweep_param = ctx.param;
    row.sweep_value = ctx.value;
    row.seed = ctx.seed;
    row.objective = result.objective;
    row.total_sensed_bytes = result.total_sensed_bytes;
    row.total_update_bytes = result.total_update_bytes;
    row.n_selected = static_cast<int>(result.selected_ids.size());
    row.n_feasible = result.n_feasible;
    if (config.record_wall_time) {
      row.wall_time_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    out.rows.push_back(std::move(row));
  }
}

std::vector<Device> population_for(const ExperimentConfig& config, std::uint64_t seed, int n_devices) {
  auto pop = config.population;
  pop.seed = seed;
  pop.n_devices = n_devices;
  return sample_population(pop);
}

void sweep_seed(const ExperimentConfig& config, std::uint64_t seed, RunOutput& out) {
  const auto& grid = config.sweep.grid;
  if (config.sweep.parameter == kSweepLmax) {
    // One population per seed; only the capacity changes along the grid.
    const auto devices = population_for(config, seed, config.population.n_devices);
    auto instance = build_instance(devices, config, config.l_max_bytes);
    for (const double v : grid) {
      instance.capacity_bytes = static_cast<std::int64_t>(std::llround(v));
      solve_all(config, instance, {kSweepLmax, v, seed}, out);
    }
  } else {
    for (const double v : grid) {
      const auto devices = population_for(config, seed, static_cast<int>(std::lround(v)));
      const auto instance = build_instance(devices, config, config.l_max_bytes);
      solve_all(config, instance, {kSweepDevices, v, seed}, out);
    }
  }
}

void sort_output(RunOutput& out) {
  std::sort(out.rows.begin(), out.rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.sweep_value, a.seed, a.algorithm) < std::tie(b.sweep_value, b.seed, b.algorithm);
  });
  std::sort(out.skipped.begin(), out.skipped.end(), [](const SkippedRun& a, const SkippedRun& b) {
    return std::tie(a.sweep_value, a.seed, a.algorithm) < std::tie(b.sweep_value, b.seed, b.algorithm);
  });
}

}  // namespace

RunOutput run_round(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  RunOutput out;
  const auto devices = population_for(config, seed, config.population.n_devices);
  const auto instance = build_instance(devices, config, config.l_max_bytes);
  solve_all(config, instance, {kSweepLmax, static_cast<double>(config.l_max_bytes), seed}, out);
  return out;
}

RunOutput sweep(const ExperimentConfig& config) {
  config.validate();
  const auto& spec = config.sweep;
  if (spec.parameter != kSweepLmax && spec.parameter != kSweepDevices) {
    throw ConfigError("unknown sweep parameter: " + spec.parameter);
  }
  if (spec.grid.empty()) throw ConfigError("sweep grid is empty");
  for (const double v : spec.grid) {
    if (spec.parameter == kSweepDevices && (v < 1.0 || v != std::floor(v))) {
      throw ConfigError("n_devices grid values must be positive integers");
    }
    if (spec.parameter == kSweepLmax && v < 0.0) throw ConfigError("l_max_bytes grid values must be >= 0");
  }

  std::vector<RunOutput> per_seed(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) sweep_seed(config, config.seeds[i], per_seed[i]);
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), config.seeds.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  RunOutput out;
  for (auto& part : per_seed) {
    std::move(part.rows.begin(), part.rows.end(), std::back_inserter(out.rows));
    std::move(part.skipped.begin(), part.skipped.end(), std::back_inserter(out.skipped));
  }
  sort_output(out);
  return out;
}

std::vector<SummaryRow> summarize(std::span<const MetricsRow> rows) {
  if (rows.empty()) throw std::domain_error("summarize: no rows");
  using Key = std::tuple<std::string, double, Algorithm>;
  std::map<Key, std::vector<const MetricsRow*>> groups;
  for (const auto& r : rows) groups[{r.sweep_param, r.sweep_value, r.algorithm}].push_back(&r);

  auto mean_sd = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(xs.size()))};
  };

  std::vector<SummaryRow> out;
  for (const auto& [key, group] : groups) {
    std::vector<double> obj, sensed, sel, feas;
    for (const auto* r : group) {
      obj.push_back(r->objective);
      sensed.push_back(static_cast<double>(r->total_sensed_bytes));
      sel.push_back(r->n_selected);
      feas.push_back(r->n_feasible);
    }
    SummaryRow s;
    s.sweep_param = std::get<0>(key);
    s.sweep_value = std::get<1>(key);
    s.algorithm = std::get<2>(key);
    s.count = static_cast<int>(group.size());
    std::tie(s.objective_mean, s.objective_sd) = mean_sd(obj);
    std::tie(s.sensed_mean, s.sensed_sd) = mean_sd(sensed);
    s.n_selected_mean = mean_sd(sel).first;
    s.n_feasible_mean = mean_sd(feas).first;
    out.push_back(std::move(s));
  }
  return out;
}

std::string_view metrics_csv_header() {
  return "algorithm,sweep_param,sweep_value,seed,objective,total_sensed_bytes,total_update_bytes,n_selected,"
         "n_feasible,wall_time_ms";
}

void write_metrics_csv(std::ostream& out, const RunOutput& output, std::span<const std::string> provenance) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << metrics_csv_header() << '\n';
  for (const auto& r : output.rows) {
    out << to_string(r.algorithm) << ',' << r.sweep_param << ',' << format_double(r.sweep_value) << ',' << r.seed
        << ',' << format_double(r.objective) << ',' << r.total_sensed_bytes << ',' << r.total_update_bytes << ','
        << r.n_selected << ',' << r.n_feasible << ',' << format_double(r.wall_time_ms) << '\n';
  }
  for (const auto& s : output.skipped) {
    out << "# skipped algorithm=" << to_string(s.algorithm) << ' ' << s.sweep_param << '='
        << format_double(s.sweep_value) << " seed=" << s.seed << " reason=" << s.reason << '\n';
  }
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> summary) {
  out << "algorithm,sweep_param,sweep_value,count,objective_mean,objective_sd,sensed_mean,sensed_sd,"
         "n_selected_mean,n_feasible_mean\n";
  for (const auto& s : summary) {
    out << to_string(s.algorithm) << ',' << s.sweep_param << ',' << format_double(s.sweep_value) << ',' << s.count
        << ',' << format_double(s.objective_mean) << ',' << format_double(s.objective_sd) << ','
        << format_double(s.sensed_mean) << ',' << format_double(s.sensed_sd) << ','
        << format_double(s.n_selected_mean) << ',' << format_double(s.n_feasible_mean) << '\n';
  }
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 90, kRight = 150, kTop = 40, kBottom = 60;

std::string_view color_for(Algorithm a) {
  switch (a) {
    case Algorithm::Greedy:
      return "#1f77b4";
    case Algorithm::BestSinr:
      return "#d62728";
    case Algorithm::DpOracle:
      return "#2ca02c";
  }
  return "#000000";
}

double metric_of(const SummaryRow& s, PlotMetric m) {
  return m == PlotMetric::Objective ? s.objective_mean : s.sensed_mean;
}

}  // namespace

std::string render_plot_svg(std::span<const SummaryRow> summary, PlotMetric metric) {
  if (summary.empty()) throw std::domain_error("emit_plot: empty summary");

  std::map<Algorithm, std::vector<std::pair<double, double>>> series;
  double x_lo = summary.front().sweep_value, x_hi = x_lo, y_hi = 0.0;
  for (const auto& s : summary) {
    const double y = metric_of(s, metric);
    series[s.algorithm].emplace_back(s.sweep_value, y);
    x_lo = std::min(x_lo, s.sweep_value);
    x_hi = std::max(x_hi, s.sweep_value);
    y_hi = std::max(y_hi, y);
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= 0.0) y_hi = 1.0;
  y_hi *= 1.05;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - y / y_hi * plot_h; };
  const int y_precision = metric == PlotMetric::Objective ? 3 : 0;
  const std::string x_label = summary.front().sweep_param;
  const std::string y_label = metric == PlotMetric::Objective ? "objective" : "total sensed bytes";

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double yv = y_hi * i / 5.0;
    svg << "<text x=\"" << format_fixed(px(xv), 2) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << format_fixed(xv, 0) << "</text>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << format_fixed(py(yv) + 4, 2) << "\" text-anchor=\"end\">"
        << format_fixed(yv, y_precision) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n"
      << "<text transform=\"translate(20," << kTop + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << y_label << "</text>\n";

  int legend_row = 0;
  for (const auto& [algorithm, points] : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << color_for(algorithm) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      svg << (i ? " " : "") << format_fixed(px(points[i].first), 2) << ',' << format_fixed(py(points[i].second), 2);
    }
    svg << "\"><title>" << to_string(algorithm) << "</title></polyline>\n";
    const double ly = kTop + 10 + 20 * legend_row++;
    svg << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color_for(algorithm) << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + plot_w + 46 << "\" y=\"" << ly + 4 << "\">" << to_string(algorithm)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(std::span<const SummaryRow> summary, PlotMetric metric, const std::filesystem::path& path) {
  const auto svg = render_plot_svg(summary, metric);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << svg;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace fedsel
