#pragma once

// Radio propagation for a single device to edge-server uplink: 3GPP macro
// pathloss, thermal noise, and Shannon capacity.

namespace fedsel {

double mw_to_dbm(double milliwatts);
double db_to_linear(double db);
double linear_to_db(double linear);

struct RadioParams {
  double tx_power_dbm = 23.010299956639813;  // 200 mW
  double noise_density_dbm_hz = -174.0;
  double bandwidth_hz = 180e3;  // one resource block per user
  double min_distance_km = 0.01;

  /// Throws std::invalid_argument on a non-positive bandwidth or clamp floor.
  void validate() const;
};

struct LinkBudget {
  double distance_km = 0.0;
  double pathloss_db = 0.0;
  double rx_power_dbm = 0.0;
  double noise_power_dbm = 0.0;
  double snr_linear = 0.0;
  double spectral_efficiency_bps_hz = 0.0;
  double rate_bps = 0.0;
};

/// 128.1 + 37.6 log10(d). Throws std::domain_error for d <= 0.
double pathloss_db(double distance_km);

/// Noise floor integrated over the channel. Throws std::domain_error for
/// bandwidth <= 0.
double noise_power_dbm(double bandwidth_hz, double noise_density_dbm_hz);

/// Full uplink budget. Distances below params.min_distance_km are clamped;
/// the clamped value is what ends up in LinkBudget::distance_km.
LinkBudget link_budget(double distance_km, const RadioParams& params);

}  // namespace fedsel
