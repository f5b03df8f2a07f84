#include "fedsel/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include "fedsel/linkbudget.hpp"

namespace fedsel {

using nlohmann::json;

FileConfig default_file_config() {
  FileConfig cfg;
  cfg.experiment.seeds = default_seeds();
  cfg.experiment.sweep.grid = cfg.lmax_grid;
  return cfg;
}

namespace {

void require_object(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, std::string_view key, T& dst) {
  const auto it = j.find(std::string(key));
  if (it != j.end()) dst = it->template get<T>();
}

void parse_population(const json& j, PopulationConfig& p) {
  require_object(j, "population",
                 {"n_devices", "area_side_km", "dataset_sigma_bytes", "update_mean_bytes", "update_sigma_bytes",
                  "computational_intensity", "categories"});
  read(j, "n_devices", p.n_devices);
  read(j, "area_side_km", p.area_side_km);
  read(j, "dataset_sigma_bytes", p.dataset_sigma_bytes);
  read(j, "update_mean_bytes", p.update_mean_bytes);
  read(j, "update_sigma_bytes", p.update_sigma_bytes);
  read(j, "computational_intensity", p.computational_intensity);
  if (j.contains("categories")) {
    const auto& cats = j.at("categories");
    if (!cats.is_array()) throw ConfigError("population.categories: expected an array");
    p.categories.clear();
    for (const auto& c : cats) {
      require_object(c, "population.categories[]", {"name", "mix_fraction", "mean_dataset_bytes", "compute_capacity_cps"});
      DeviceCategory cat;
      cat.kind = parse_device_kind(c.at("name").get<std::string>());
      cat.mix_fraction = c.at("mix_fraction").get<double>();
      cat.mean_dataset_bytes = c.at("mean_dataset_bytes").get<double>();
      cat.compute_capacity_cps = c.at("compute_capacity_cps").get<double>();
      p.categories.push_back(cat);
    }
  }
}

void parse_radio(const json& j, RadioParams& r) {
  require_object(j, "radio", {"tx_power_mw", "tx_power_dbm", "noise_density_dbm_hz", "bandwidth_hz", "min_distance_km"});
  if (j.contains("tx_power_mw") && j.contains("tx_power_dbm")) {
    throw ConfigError("radio: give tx_power_mw or tx_power_dbm, not both");
  }
  if (j.contains("tx_power_mw")) r.tx_power_dbm = mw_to_dbm(j.at("tx_power_mw").get<double>());
  read(j, "tx_power_dbm", r.tx_power_dbm);
  read(j, "noise_density_dbm_hz", r.noise_density_dbm_hz);
  read(j, "bandwidth_hz", r.bandwidth_hz);
  read(j, "min_distance_km", r.min_distance_km);
}

void parse_spectrum(const json& j, SpectrumStudyConfig& s) {
  require_object(j, "spectrum", {"total_bandwidth_hz", "block_bandwidth_hz", "max_wait_s", "drop_penalty_delay_s",
                                 "workload", "q_learning", "expected_concurrency", "eval_episodes", "seed"});
  read(j, "total_bandwidth_hz", s.env.total_bandwidth_hz);
  read(j, "block_bandwidth_hz", s.env.block_bandwidth_hz);
  read(j, "max_wait_s", s.env.max_wait_s);
  read(j, "drop_penalty_delay_s", s.env.drop_penalty_delay_s);
  read(j, "expected_concurrency", s.expected_concurrency);
  read(j, "eval_episodes", s.eval_episodes);
  read(j, "seed", s.seed);
  if (j.contains("workload")) {
    const auto& w = j.at("workload");
    require_object(w, "spectrum.workload", {"arrivals", "arrival_rate_hz", "tasks_per_episode", "length_min_bits",
                                            "length_max_bits", "eta_min", "eta_max", "max_delay_s"});
    if (w.contains("arrivals")) {
      const auto kind = w.at("arrivals").get<std::string>();
      if (kind == "poisson") {
        s.workload.arrivals = spectrum::ArrivalProcess::Poisson;
      } else if (kind == "periodic") {
        s.workload.arrivals = spectrum::ArrivalProcess::Periodic;
      } else {
        throw ConfigError("spectrum.workload.arrivals: expected 'poisson' or 'periodic'");
      }
    }
    read(w, "arrival_rate_hz", s.workload.arrival_rate_hz);
    read(w, "tasks_per_episode", s.workload.tasks_per_episode);
    read(w, "length_min_bits", s.workload.length_min_bits);
    read(w, "length_max_bits", s.workload.length_max_bits);
    read(w, "eta_min", s.workload.eta_min);
    read(w, "eta_max", s.workload.eta_max);
    read(w, "max_delay_s", s.workload.max_delay_s);
  }
  if (j.contains("q_learning")) {
    const auto& q = j.at("q_learning");
    require_object(q, "spectrum.q_learning", {"learning_rate", "discount", "epsilon_start", "epsilon_end", "episodes",
                                              "reward_cap", "violation_penalty"});
    read(q, "learning_rate", s.hyper.learning_rate);
    read(q, "discount", s.hyper.discount);
    read(q, "epsilon_start", s.hyper.epsilon_start);
    read(q, "epsilon_end", s.hyper.epsilon_end);
    read(q, "episodes", s.hyper.episodes);
    read(q, "reward_cap", s.hyper.reward_cap);
    read(q, "violation_penalty", s.hyper.violation_penalty);
  }
}

}  // namespace

FileConfig parse_config(const json& doc) {
  auto cfg = default_file_config();
  auto& e = cfg.experiment;
  try {
    require_object(doc, "config", {"population", "radio", "t_upd_s", "l_max_bytes", "algorithms", "seeds", "sweeps",
                                   "dp", "spectrum"});
    if (doc.contains("population")) parse_population(doc.at("population"), e.population);
    if (doc.contains("radio")) parse_radio(doc.at("radio"), e.radio);
    read(doc, "t_upd_s", e.t_upd_s);
    read(doc, "l_max_bytes", e.l_max_bytes);
    if (doc.contains("algorithms")) {
      e.algorithms.clear();
      for (const auto& a : doc.at("algorithms")) e.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    read(doc, "seeds", e.seeds);
    if (doc.contains("sweeps")) {
      const auto& s = doc.at("sweeps");
      require_object(s, "sweeps", {"l_max_bytes", "n_devices"});
      read(s, "l_max_bytes", cfg.lmax_grid);
      read(s, "n_devices", cfg.devices_grid);
    }
    if (doc.contains("dp")) {
      const auto& d = doc.at("dp");
      require_object(d, "dp", {"quantum_bytes", "max_cells"});
      read(d, "quantum_bytes", e.dp_quantum_bytes);
      read(d, "max_cells", e.dp_max_cells);
    }
    if (doc.contains("spectrum")) parse_spectrum(doc.at("spectrum"), cfg.spectrum);

    e.sweep.grid = cfg.lmax_grid;
    e.validate();
    cfg.spectrum.env.validate();
    cfg.spectrum.workload.validate();
    cfg.spectrum.hyper.validate();
    if (cfg.spectrum.expected_concurrency < 1) throw ConfigError("spectrum.expected_concurrency must be >= 1");
    if (cfg.spectrum.eval_episodes < 1) throw ConfigError("spectrum.eval_episodes must be >= 1");
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& ex) {
    throw ConfigError(ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return cfg;
}

FileConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return parse_config(doc);
}

}  // namespace fedsel
