#pragma once

namespace flqkd::constants {

// CODATA exact values, truncated to 9 significant digits.
inline constexpr double planck_j_s = 6.62607015e-34;
inline constexpr double speed_of_light_m_s = 2.99792458e8;
inline constexpr double planck_times_c_j_m = 1.98644586e-25;

inline constexpr double picoseconds_per_second = 1e12;

}  // namespace flqkd::constants
