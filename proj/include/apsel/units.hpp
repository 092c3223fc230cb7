#pragma once

#include <cmath>
#include <cstdint>

namespace apsel {

/// Simulation time in integer microseconds.
using Tick = std::int64_t;

inline constexpr double kTicksPerSecond = 1e6;

template <typename Scalar>
Scalar dbm_to_mw(Scalar dbm) {
  using std::pow;
  return pow(Scalar(10), dbm / Scalar(10));
}

template <typename Scalar>
Scalar mw_to_dbm(Scalar mw) {
  using std::log10;
  return Scalar(10) * log10(mw);
}

template <typename Scalar>
Scalar db_to_linear(Scalar db) {
  using std::pow;
  return pow(Scalar(10), db / Scalar(10));
}

template <typename Scalar>
Scalar linear_to_db(Scalar ratio) {
  using std::log10;
  return Scalar(10) * log10(ratio);
}

inline double ticks_to_seconds(Tick t) { return static_cast<double>(t) / kTicksPerSecond; }

/// Rounds a duration up to whole ticks; a frame never finishes early.
inline Tick seconds_to_ticks(double seconds) {
  return static_cast<Tick>(std::ceil(seconds * kTicksPerSecond - 1e-6));
}

}  // namespace apsel
