#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "apsel/units.hpp"

namespace apsel {

struct PhyConfig {
  double cca_threshold_dbm = -86.0;
  // Total in-band noise power (N_o * W), not a density.
  double noise_floor_dbm = -90.0;
  double receiver_sensitivity_dbm = -90.96;
  // When unset, OPASA uses the minimum of each STA's SINR vector.
  std::optional<double> sinr_threshold_db;
  // Documentation only; already folded into noise_floor_dbm.
  double bandwidth_hz = 20e6;

  double cca_threshold_mw() const { return dbm_to_mw(cca_threshold_dbm); }
  double noise_floor_mw() const { return dbm_to_mw(noise_floor_dbm); }
  double receiver_sensitivity_mw() const { return dbm_to_mw(receiver_sensitivity_dbm); }

  void validate() const;
};

/// One overheard interfering frame.
struct InterferenceSample {
  int source_ap = -1;
  double rx_power_mw = 0.0;
  double frame_length_bits = 0.0;
  double phy_rate_bps = 0.0;
  double arrival_time_s = 0.0;
};

struct MeasurementWindow {
  double duration_s = 0.0;
  long slots = 0;
  std::vector<InterferenceSample> samples;

  static MeasurementWindow of_slots(long n, double slot_time_s) {
    MeasurementWindow w;
    w.slots = n;
    w.duration_s = static_cast<double>(n) * slot_time_s;
    return w;
  }
};

/// Sum of concurrently received interferer powers.
template <typename Scalar>
Scalar instantaneous_interference(std::span<const Scalar> interferer_powers_mw) {
  Scalar total(0);
  for (Scalar p : interferer_powers_mw) {
    if (p < Scalar(0)) throw std::invalid_argument("instantaneous_interference: negative power");
    total += p;
  }
  return total;
}

/// Energy of every overheard frame (power x airtime) averaged over the window.
double windowed_interference(const MeasurementWindow& window);

template <typename Scalar>
Scalar sinr(Scalar rx_power_mw, Scalar interference_mw, Scalar noise_floor_mw) {
  if (!(noise_floor_mw > Scalar(0))) throw std::invalid_argument("sinr: noise floor must be > 0");
  if (interference_mw < Scalar(0)) throw std::invalid_argument("sinr: negative interference");
  return rx_power_mw / (interference_mw + noise_floor_mw);
}

/// Table of SINR floors (dB) and the PHY rate (Mbps) each one unlocks.
struct RateBracket {
  double min_sinr_db;
  double rate_mbps;
};

inline constexpr std::array<RateBracket, 8> kRateTable{{
    {6.0, 6.0},
    {7.8, 9.0},
    {9.0, 12.0},
    {10.8, 18.0},
    {17.0, 24.0},
    {18.8, 36.0},
    {24.0, 48.0},
    {24.6, 54.0},
}};

inline constexpr double kLowestRateMbps = 6.0;

/// Highest rate whose floor is met; brackets are closed below, open above.
/// Returns nullopt when the SINR is below the lowest floor.
std::optional<double> rate_for_sinr(double sinr_db);

/// SINR floor (dB) a frame sent at `rate_mbps` needs. Throws on unknown rates.
double min_sinr_db_for_rate(double rate_mbps);

/// Energy detection: strictly above the CCA threshold.
inline bool senses_busy(double sensed_power_mw, double cca_threshold_mw) {
  if (sensed_power_mw < 0.0) throw std::invalid_argument("senses_busy: negative power");
  return sensed_power_mw > cca_threshold_mw;
}

}  // namespace apsel
