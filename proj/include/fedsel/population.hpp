#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace fedsel {

enum class DeviceKind { Smartphone, Vehicle, IoTSensor };

std::string_view to_string(DeviceKind kind);
/// Throws std::invalid_argument on an unknown label.
DeviceKind parse_device_kind(std::string_view name);

struct DeviceCategory {
  DeviceKind kind = DeviceKind::Smartphone;
  double mix_fraction = 0.0;
  double mean_dataset_bytes = 0.0;
  double compute_capacity_cps = 0.0;
};

/// 50/30/20 smartphone/vehicle/sensor mix with the reference dataset means
/// and CPU capacities.
std::vector<DeviceCategory> default_categories();

struct Position {
  double x_km = 0.0;
  double y_km = 0.0;

  bool operator==(const Position&) const = default;
};

double distance_km(Position a, Position b);

struct Device {
  int id = 0;
  DeviceKind category = DeviceKind::Smartphone;
  Position position;
  std::int64_t dataset_bytes = 0;  // D_i
  std::int64_t update_bytes = 0;   // l_i
  double compute_capacity_cps = 0.0;

  bool operator==(const Device&) const = default;
};

struct PopulationConfig {
  int n_devices = 300;
  double area_side_km = 1.0;
  std::vector<DeviceCategory> categories = default_categories();
  double dataset_sigma_bytes = 20e3;
  double update_mean_bytes = 10e3;
  double update_sigma_bytes = 2e3;
  // Cycles per byte of local data; see README for the unit convention.
  double computational_intensity = 0.5;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when the config is unusable, including a
  /// category mix that does not sum to one.
  void validate() const;

  /// The edge server sits at the centre of the square.
  Position server_position() const { return {area_side_km / 2.0, area_side_km / 2.0}; }
};

/// Per-category device counts: round(mix * N), remainder to the first category.
std::vector<int> category_counts(const PopulationConfig& config);

/// Samples N devices deterministically from config.seed.
///
/// Each category draws from its own sub-stream, so for a fixed seed a smaller
/// population holds a per-category prefix of a larger one. Devices are
/// numbered in category order. Dataset and update sizes are normal draws
/// rounded to whole bytes and resampled until at least one byte.
std::vector<Device> sample_population(const PopulationConfig& config);

/// alpha * D / C. Throws std::domain_error when the capacity is not positive.
double compute_delay(const Device& device, double alpha);

/// 8 l / r. A non-positive rate yields +inf (the device can never upload).
double comm_delay(std::int64_t update_bytes, double rate_bps);

/// w_i = D_i / sum_j D_j. Throws std::domain_error on an empty list or a
/// non-positive dataset.
std::vector<double> weights(std::span<const Device> devices);

void write_population_csv(std::ostream& out, std::span<const Device> devices);
/// Throws std::runtime_error on a malformed header or row.
std::vector<Device> read_population_csv(std::istream& in);

}  // namespace fedsel
