#include "fedsel/population.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fedsel/format.hpp"
#include "fedsel/random.hpp"

namespace fedsel {

std::string_view to_string(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::Smartphone:
      return "Smartphone";
    case DeviceKind::Vehicle:
      return "Vehicle";
    case DeviceKind::IoTSensor:
      return "IoTSensor";
  }
  return "?";
}

DeviceKind parse_device_kind(std::string_view name) {
  if (name == "Smartphone") return DeviceKind::Smartphone;
  if (name == "Vehicle") return DeviceKind::Vehicle;
  if (name == "IoTSensor") return DeviceKind::IoTSensor;
  throw std::invalid_argument("unknown device category: " + std::string(name));
}

std::vector<DeviceCategory> default_categories() {
  return {
      {DeviceKind::Smartphone, 0.5, 150e3, 1e6},
      {DeviceKind::Vehicle, 0.3, 250e3, 2e6},
      {DeviceKind::IoTSensor, 0.2, 100e3, 5e5},
  };
}

double distance_km(Position a, Position b) { return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km); }

void PopulationConfig::validate() const {
  if (n_devices < 1) throw std::invalid_argument("population: n_devices must be >= 1");
  if (!(area_side_km > 0.0)) throw std::invalid_argument("population: area_side_km must be positive");
  if (categories.empty()) throw std::invalid_argument("population: no device categories");
  if (dataset_sigma_bytes < 0.0 || update_sigma_bytes < 0.0) {
    throw std::invalid_argument("population: standard deviations must be >= 0");
  }
  if (!(update_mean_bytes > 0.0)) throw std::invalid_argument("population: update_mean_bytes must be positive");
  if (computational_intensity < 0.0) {
    throw std::invalid_argument("population: computational_intensity must be >= 0");
  }
  double mix = 0.0;
  for (const auto& c : categories) {
    if (c.mix_fraction < 0.0) throw std::invalid_argument("population: negative mix fraction");
    if (!(c.mean_dataset_bytes > 0.0)) throw std::invalid_argument("population: mean_dataset_bytes must be positive");
    if (!(c.compute_capacity_cps > 0.0)) {
      throw std::invalid_argument("population: compute_capacity_cps must be positive");
    }
    mix += c.mix_fraction;
  }
  if (std::abs(mix - 1.0) > 1e-9) throw std::invalid_argument("population: mix fractions must sum to 1");
}

std::vector<int> category_counts(const PopulationConfig& config) {
  config.validate();
  const auto k = config.categories.size();
  std::vector<int> counts(k, 0);
  int assigned = 0;
  for (std::size_t c = 1; c < k; ++c) {
    counts[c] = static_cast<int>(std::lround(config.categories[c].mix_fraction * config.n_devices));
    assigned += counts[c];
  }
  // Rounding up in several categories can overshoot N; take the excess back
  // from the last categories.
  for (std::size_t c = k - 1; assigned > config.n_devices && c >= 1; --c) {
    const int take = std::min(counts[c], assigned - config.n_devices);
    counts[c] -= take;
    assigned -= take;
  }
  counts[0] = config.n_devices - assigned;
  return counts;
}

namespace {

std::int64_t sample_bytes(Rng& rng, double mean, double sigma) {
  for (;;) {
    const auto v = static_cast<std::int64_t>(std::llround(rng.normal(mean, sigma)));
    if (v >= 1) return v;
  }
}

}  // namespace

std::vector<Device> sample_population(const PopulationConfig& config) {
  const auto counts = category_counts(config);
  std::vector<Device> devices;
  devices.reserve(static_cast<std::size_t>(config.n_devices));
  int next_id = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const auto& cat = config.categories[c];
    Rng rng(derive_seed(config.seed, c));
    for (int i = 0; i < counts[c]; ++i) {
      Device d;
      d.id = next_id++;
      d.category = cat.kind;
      d.position.x_km = rng.uniform(0.0, config.area_side_km);
      d.position.y_km = rng.uniform(0.0, config.area_side_km);
      d.dataset_bytes = sample_bytes(rng, cat.mean_dataset_bytes, config.dataset_sigma_bytes);
      d.update_bytes = sample_bytes(rng, config.update_mean_bytes, config.update_sigma_bytes);
      d.compute_capacity_cps = cat.compute_capacity_cps;
      devices.push_back(d);
    }
  }
  return devices;
}

double compute_delay(const Device& device, double alpha) {
  if (!(device.compute_capacity_cps > 0.0)) {
    throw std::domain_error("compute_delay: compute capacity must be positive");
  }
  return alpha * static_cast<double>(device.dataset_bytes) / device.compute_capacity_cps;
}

double comm_delay(std::int64_t update_bytes, double rate_bps) {
  if (!(rate_bps > 0.0)) return std::numeric_limits<double>::infinity();
  return 8.0 * static_cast<double>(update_bytes) / rate_bps;
}

std::vector<double> weights(std::span<const Device> devices) {
  if (devices.empty()) throw std::domain_error("weights: empty device list");
  double total = 0.0;
  for (const auto& d : devices) {
    if (d.dataset_bytes <= 0) throw std::domain_error("weights: dataset size must be positive");
    total += static_cast<double>(d.dataset_bytes);
  }
  std::vector<double> w;
  w.reserve(devices.size());
  for (const auto& d : devices) w.push_back(static_cast<double>(d.dataset_bytes) / total);
  return w;
}

namespace {
constexpr std::string_view kPopulationHeader =
    "id,category,x_km,y_km,dataset_bytes,update_bytes,capacity_cps";
}

void write_population_csv(std::ostream& out, std::span<const Device> devices) {
  out << kPopulationHeader << '\n';
  for (const auto& d : devices) {
    out << d.id << ',' << to_string(d.category) << ',' << format_double(d.position.x_km) << ','
        << format_double(d.position.y_km) << ',' << d.dataset_bytes << ',' << d.update_bytes << ','
        << format_double(d.compute_capacity_cps) << '\n';
  }
}

std::vector<Device> read_population_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kPopulationHeader) {
    throw std::runtime_error("population csv: missing or unexpected header");
  }
  std::vector<Device> devices;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 7) {
      throw std::runtime_error("population csv: line " + std::to_string(lineno) + " has " +
                               std::to_string(cols.size()) + " columns");
    }
    try {
      Device d;
      d.id = std::stoi(cols[0]);
      d.category = parse_device_kind(cols[1]);
      d.position = {std::stod(cols[2]), std::stod(cols[3])};
      d.dataset_bytes = std::stoll(cols[4]);
      d.update_bytes = std::stoll(cols[5]);
      d.compute_capacity_cps = std::stod(cols[6]);
      devices.push_back(d);
    } catch (const std::exception& e) {
      throw std::runtime_error("population csv: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return devices;
}

}  // namespace fedsel
