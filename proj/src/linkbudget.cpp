#include "fedsel/linkbudget.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedsel {

double mw_to_dbm(double milliwatts) { return 10.0 * std::log10(milliwatts); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void RadioParams::validate() const {
  if (!(bandwidth_hz > 0.0)) {
    throw std::invalid_argument("radio: bandwidth_hz must be positive");
  }
  if (!(min_distance_km > 0.0)) {
    throw std::invalid_argument("radio: min_distance_km must be positive");
  }
}

double pathloss_db(double distance_km) {
  if (!(distance_km > 0.0)) {
    throw std::domain_error("pathloss_db: distance must be positive");
  }
  return 128.1 + 37.6 * std::log10(distance_km);
}

double noise_power_dbm(double bandwidth_hz, double noise_density_dbm_hz) {
  if (!(bandwidth_hz > 0.0)) {
    throw std::domain_error("noise_power_dbm: bandwidth must be positive");
  }
  return noise_density_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

LinkBudget link_budget(double distance_km, const RadioParams& params) {
  params.validate();
  LinkBudget lb;
  lb.distance_km = std::max(distance_km, params.min_distance_km);
  lb.pathloss_db = pathloss_db(lb.distance_km);
  lb.rx_power_dbm = params.tx_power_dbm - lb.pathloss_db;
  lb.noise_power_dbm = noise_power_dbm(params.bandwidth_hz, params.noise_density_dbm_hz);
  // A transmitter switched off (-inf dBm) gives exactly zero SNR.
  lb.snr_linear = db_to_linear(lb.rx_power_dbm - lb.noise_power_dbm);
  lb.spectral_efficiency_bps_hz = std::log2(1.0 + lb.snr_linear);
  lb.rate_bps = params.bandwidth_hz * lb.spectral_efficiency_bps_hz;
  return lb;
}

}  // namespace fedsel
