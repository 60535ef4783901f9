#pragma once

#include <stdexcept>

namespace safespeed {

// All internal computation uses mph for speed, feet for distance and seconds
// for time. Conversion happens once at the ingestion and physics boundaries.
inline constexpr double kKmhToMph = 0.621371;
inline constexpr double kMToFt = 3.28084;
inline constexpr double kMphToFtPerSec = 1.466667;
inline constexpr double kGravityFtPerSec2 = 32.174;

inline double kmh_to_mph(double v_kmh) {
  if (v_kmh < 0) throw std::invalid_argument("kmh_to_mph: speed must be >= 0");
  return v_kmh * kKmhToMph;
}

inline double mph_to_kmh(double v_mph) {
  if (v_mph < 0) throw std::invalid_argument("mph_to_kmh: speed must be >= 0");
  return v_mph / kKmhToMph;
}

inline double m_to_ft(double d_m) {
  if (d_m < 0) throw std::invalid_argument("m_to_ft: distance must be >= 0");
  return d_m * kMToFt;
}

inline double mph_to_ft_s(double v_mph) {
  if (v_mph < 0) throw std::invalid_argument("mph_to_ft_s: speed must be >= 0");
  return v_mph * kMphToFtPerSec;
}

}  // namespace safespeed
