#include "apsel/phy.hpp"

#include <cmath>
#include <string>

namespace apsel {

void PhyConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("invalid phy config: ") + field);
  };
  require(std::isfinite(cca_threshold_dbm), "cca_threshold_dbm");
  require(std::isfinite(noise_floor_dbm), "noise_floor_dbm");
  require(std::isfinite(receiver_sensitivity_dbm), "receiver_sensitivity_dbm");
  require(!sinr_threshold_db || std::isfinite(*sinr_threshold_db), "sinr_threshold_db");
  require(bandwidth_hz > 0.0, "bandwidth_hz");
}

double windowed_interference(const MeasurementWindow& window) {
  if (!(window.duration_s > 0.0)) throw std::invalid_argument("windowed_interference: zero-duration window");
  double energy = 0.0;
  for (const auto& s : window.samples) {
    if (s.phy_rate_bps <= 0.0) throw std::invalid_argument("windowed_interference: non-positive rate");
    energy += s.rx_power_mw * s.frame_length_bits / s.phy_rate_bps;
  }
  return energy / window.duration_s;
}

std::optional<double> rate_for_sinr(double sinr_db) {
  if (!std::isfinite(sinr_db)) {
    if (sinr_db > 0) return kRateTable.back().rate_mbps;
    if (std::isnan(sinr_db)) throw std::invalid_argument("rate_for_sinr: NaN");
    return std::nullopt;
  }
  std::optional<double> rate;
  for (const auto& b : kRateTable) {
    if (sinr_db >= b.min_sinr_db) rate = b.rate_mbps;
  }
  return rate;
}

double min_sinr_db_for_rate(double rate_mbps) {
  for (const auto& b : kRateTable) {
    if (b.rate_mbps == rate_mbps) return b.min_sinr_db;
  }
  throw std::invalid_argument("min_sinr_db_for_rate: rate not in table: " + std::to_string(rate_mbps));
}

}  // namespace apsel
