#pragma once

#include <numbers>

namespace magconv {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact/recommended values.
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double speed_of_light = 299792458.0; // m/s

// Ordinary frequency (Hz) to angular (rad/s) and back. Every rate crosses
// this boundary exactly once, when it enters or leaves the library.
constexpr double angular(double hz) noexcept { return two_pi * hz; }
constexpr double ordinary(double rad_per_s) noexcept { return rad_per_s / two_pi; }

} // namespace magconv
