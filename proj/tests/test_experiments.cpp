#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include "fedsel/config.hpp"
#include "fedsel/experiments.hpp"

using namespace fedsel;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  auto cfg = default_file_config().experiment;
  cfg.seeds = {1, 2, 3};
  return cfg;
}

MetricsRow row(Algorithm a, double value, double objective, std::int64_t sensed) {
  MetricsRow r;
  r.algorithm = a;
  r.sweep_param = std::string(kSweepLmax);
  r.sweep_value = value;
  r.objective = objective;
  r.total_sensed_bytes = sensed;
  return r;
}

}  // namespace

TEST_CASE("default config mirrors the reference parameters") {
  const auto cfg = default_file_config();
  const auto& e = cfg.experiment;
  CHECK(e.population.n_devices == 300);
  CHECK(e.t_upd_s == 0.12);
  CHECK(e.l_max_bytes == 1'000'000);
  CHECK(e.radio.bandwidth_hz == 180e3);
  CHECK(e.population.computational_intensity == 0.5);
  CHECK(e.seeds.size() == 30);
  CHECK(cfg.lmax_grid.size() == 10);
  CHECK(cfg.lmax_grid.front() == 200'000.0);
  CHECK(cfg.lmax_grid.back() == 2'000'000.0);
  CHECK(cfg.devices_grid == std::vector<double>{100, 200, 300, 400, 500, 600, 700, 800});
}

TEST_CASE("run_round emits one row per algorithm") {
  auto cfg = small_config();
  cfg.algorithms = {Algorithm::Greedy};
  const auto one = run_round(cfg, 7);
  REQUIRE(one.rows.size() == 1);
  // Capacity over the smallest feasible update bounds the count.
  auto pop = cfg.population;
  pop.seed = 7;
  const auto devices = sample_population(pop);
  const auto inst = build_instance(devices, cfg, cfg.l_max_bytes);
  std::int64_t smallest = cfg.l_max_bytes;
  for (const auto& it : inst.items) {
    if (it.feasible) smallest = std::min(smallest, it.size_bytes);
  }
  CHECK(one.rows[0].n_selected <= cfg.l_max_bytes / smallest);
  CHECK(one.rows[0].n_selected <= one.rows[0].n_feasible);
  CHECK(one.rows[0].total_update_bytes <= cfg.l_max_bytes);
  CHECK(one.rows[0].objective >= 0.0);
  CHECK(one.rows[0].objective <= 1.0);

  cfg.algorithms = {};
  CHECK(run_round(cfg, 7).rows.empty());

  cfg.algorithms = {Algorithm::Greedy, Algorithm::BestSinr, Algorithm::DpOracle};
  cfg.dp_quantum_bytes = 1;  // exact; coarser quanta are conservative
  const auto three = run_round(cfg, 7);
  REQUIRE(three.rows.size() == 3);
  CHECK(three.rows[0].n_feasible == three.rows[1].n_feasible);
  CHECK(three.rows[1].n_feasible == three.rows[2].n_feasible);
  CHECK(three.rows[0].objective <= three.rows[2].objective);
  CHECK(three.rows[1].objective <= three.rows[2].objective);
}

TEST_CASE("DP refusals are recorded as skipped runs") {
  auto cfg = small_config();
  cfg.algorithms = {Algorithm::Greedy, Algorithm::DpOracle};
  cfg.dp_quantum_bytes = 1;
  cfg.dp_max_cells = 1000;
  const auto out = run_round(cfg, 1);
  CHECK(out.rows.size() == 1);
  REQUIRE(out.skipped.size() == 1);
  CHECK(out.skipped[0].algorithm == Algorithm::DpOracle);
  std::ostringstream csv;
  write_metrics_csv(csv, out);
  CHECK(csv.str().find("# skipped algorithm=dp_oracle") != std::string::npos);
}

TEST_CASE("sweep covers grid x seeds x algorithms") {
  auto cfg = small_config();
  cfg.sweep = {std::string(kSweepLmax), {2e5, 4e5, 6e5, 8e5, 1e6}};
  const auto out = sweep(cfg);
  CHECK(out.rows.size() == 30);

  cfg.sweep = {std::string(kSweepDevices), {100, 200}};
  CHECK(sweep(cfg).rows.size() == 12);

  cfg.sweep = {"t_upd_s", {0.1}};
  CHECK_THROWS_AS(sweep(cfg), ConfigError);
  cfg.sweep = {std::string(kSweepDevices), {10.5}};
  CHECK_THROWS_AS(sweep(cfg), ConfigError);
  cfg.sweep = {std::string(kSweepLmax), {}};
  CHECK_THROWS_AS(sweep(cfg), ConfigError);
}

TEST_CASE("single-point sweep matches run_round") {
  auto cfg = small_config();
  cfg.sweep = {std::string(kSweepLmax), {static_cast<double>(cfg.l_max_bytes)}};
  const auto s = sweep(cfg);
  std::vector<MetricsRow> expected;
  for (auto seed : cfg.seeds) {
    for (auto& r : run_round(cfg, seed).rows) expected.push_back(r);
  }
  REQUIRE(s.rows.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(s.rows[i].seed == expected[i].seed);
    CHECK(s.rows[i].objective == expected[i].objective);
    CHECK(s.rows[i].total_sensed_bytes == expected[i].total_sensed_bytes);
  }
}

TEST_CASE("greedy objective never falls as capacity grows") {
  auto cfg = small_config();
  cfg.algorithms = {Algorithm::Greedy};
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(i * 60'000.0);
  cfg.sweep = {std::string(kSweepLmax), grid};
  const auto out = sweep(cfg);
  for (auto seed : cfg.seeds) {
    double prev = -1.0;
    for (const auto& r : out.rows) {
      if (r.seed != seed) continue;
      REQUIRE(r.objective >= prev);
      prev = r.objective;
    }
  }
}

TEST_CASE("all solvers saturate the feasible set when it fits") {
  auto cfg = small_config();
  cfg.population.n_devices = 60;
  cfg.algorithms = {Algorithm::Greedy, Algorithm::BestSinr, Algorithm::DpOracle};
  cfg.dp_quantum_bytes = 1;
  for (auto seed : cfg.seeds) {
    auto pop = cfg.population;
    pop.seed = seed;
    const auto devices = sample_population(pop);
    const auto inst = build_instance(devices, cfg, 0);
    std::int64_t feasible_total = 0;
    for (const auto& it : inst.items) feasible_total += it.feasible ? it.size_bytes : 0;
    cfg.l_max_bytes = feasible_total;
    const auto out = run_round(cfg, seed);
    REQUIRE(out.rows.size() == 3);
    for (const auto& r : out.rows) {
      CHECK(r.n_selected == r.n_feasible);
      CHECK(r.total_sensed_bytes == out.rows[0].total_sensed_bytes);
    }
  }
}

TEST_CASE("worker count does not change the output") {
  auto cfg = small_config();
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7};
  cfg.algorithms = {Algorithm::Greedy, Algorithm::BestSinr, Algorithm::DpOracle};
  cfg.sweep = {std::string(kSweepDevices), {100, 300}};
  std::ostringstream serial, parallel;
  write_metrics_csv(serial, sweep(cfg));
  cfg.jobs = 4;
  write_metrics_csv(parallel, sweep(cfg));
  CHECK(serial.str() == parallel.str());
}

TEST_CASE("metrics CSV layout") {
  auto cfg = small_config();
  cfg.sweep = {std::string(kSweepLmax), {1e6}};
  std::ostringstream csv;
  const std::vector<std::string> prov{"fedsel sweep-lmax overrides: seed=4"};
  write_metrics_csv(csv, sweep(cfg), prov);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# fedsel sweep-lmax overrides: seed=4");
  std::getline(in, line);
  CHECK(line == metrics_csv_header());
  CHECK(line ==
        "algorithm,sweep_param,sweep_value,seed,objective,total_sensed_bytes,total_update_bytes,n_selected,"
        "n_feasible,wall_time_ms");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 9);
    ++rows;
  }
  CHECK(rows == 6);
  CHECK(csv.str().back() == '\n');
}

TEST_CASE("summarize") {
  const std::vector<MetricsRow> one{row(Algorithm::Greedy, 1.0, 0.7, 100)};
  const auto s1 = summarize(one);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0].objective_mean == 0.7);
  CHECK(s1[0].objective_sd == 0.0);
  CHECK(s1[0].sensed_mean == 100.0);

  const std::vector<MetricsRow> two{row(Algorithm::Greedy, 1.0, 0.2, 10), row(Algorithm::Greedy, 1.0, 0.4, 30)};
  const auto s2 = summarize(two);
  REQUIRE(s2.size() == 1);
  CHECK(s2[0].objective_mean == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s2[0].objective_sd == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s2[0].sensed_sd == doctest::Approx(10.0).epsilon(1e-12));

  std::vector<MetricsRow> many;
  for (auto a : {Algorithm::Greedy, Algorithm::BestSinr}) {
    for (double v : {1.0, 2.0, 3.0}) {
      for (int s = 0; s < 4; ++s) many.push_back(row(a, v, 0.1 * s, s));
    }
  }
  CHECK(summarize(many).size() == 6);
  CHECK_THROWS_AS(summarize(std::vector<MetricsRow>{}), std::domain_error);
}

TEST_CASE("plot output") {
  std::vector<MetricsRow> rows;
  for (auto a : {Algorithm::Greedy, Algorithm::BestSinr}) {
    for (double v : {2e5, 4e5, 6e5}) rows.push_back(row(a, v, v / 1e6 * (a == Algorithm::Greedy ? 1.0 : 0.7), 1));
  }
  const auto summary = summarize(rows);
  const auto svg = render_plot_svg(summary, PlotMetric::Objective);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  const std::regex polyline("<polyline");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), polyline), std::sregex_iterator()) == 2);
  CHECK(svg.find(">greedy<") != std::string::npos);
  CHECK(svg.find(">best_sinr<") != std::string::npos);
  CHECK(render_plot_svg(summary, PlotMetric::Objective) == svg);

  const auto dir = fs::temp_directory_path() / "fedsel_plot_test";
  fs::create_directories(dir);
  emit_plot(summary, PlotMetric::SensedBytes, dir / "a.svg");
  emit_plot(summary, PlotMetric::SensedBytes, dir / "b.svg");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
  CHECK_THROWS_AS(emit_plot(summary, PlotMetric::Objective, dir / "missing" / "c.svg"), std::runtime_error);
  CHECK_THROWS_AS(render_plot_svg(std::vector<SummaryRow>{}, PlotMetric::Objective), std::domain_error);
  fs::remove_all(dir);
}

TEST_CASE("config parsing") {
  using nlohmann::json;
  const auto cfg = parse_config(json::object());
  CHECK(cfg.experiment.population.n_devices == 300);

  const auto custom = parse_config(json::parse(R"({
    "population": {"n_devices": 50},
    "radio": {"tx_power_dbm": 20.0},
    "algorithms": ["dp_oracle"],
    "seeds": [9],
    "sweeps": {"n_devices": [10, 20]},
    "spectrum": {"workload": {"arrivals": "periodic"}, "q_learning": {"episodes": 3}}
  })"));
  CHECK(custom.experiment.population.n_devices == 50);
  CHECK(custom.experiment.radio.tx_power_dbm == 20.0);
  CHECK(custom.experiment.algorithms == std::vector<Algorithm>{Algorithm::DpOracle});
  CHECK(custom.experiment.seeds == std::vector<std::uint64_t>{9});
  CHECK(custom.devices_grid == std::vector<double>{10, 20});
  CHECK(custom.spectrum.workload.arrivals == spectrum::ArrivalProcess::Periodic);
  CHECK(custom.spectrum.hyper.episodes == 3);

  CHECK_THROWS_AS(parse_config(json::parse(R"({"t_upd": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seeds": "one"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seeds": []})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"algorithms": ["random"]})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"radio": {"tx_power_mw": 1, "tx_power_dbm": 0}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(
                      R"({"population": {"categories": [{"name": "Vehicle", "mix_fraction": 0.5,
                          "mean_dataset_bytes": 1, "compute_capacity_cps": 1}]}})")),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped defaults file equals the built-in defaults") {
  const auto file = load_config(FEDSEL_DEFAULT_CONFIG);
  const auto builtin = default_file_config();
  CHECK(file.experiment.radio.tx_power_dbm == doctest::Approx(builtin.experiment.radio.tx_power_dbm).epsilon(1e-15));
  CHECK(file.experiment.seeds == builtin.experiment.seeds);
  CHECK(file.lmax_grid == builtin.lmax_grid);
  CHECK(file.devices_grid == builtin.devices_grid);
  CHECK(file.experiment.population.categories.size() == 3);
  CHECK(file.spectrum.hyper.episodes == builtin.spectrum.hyper.episodes);
  CHECK(file.spectrum.env.total_blocks() == builtin.spectrum.env.total_blocks());
}
