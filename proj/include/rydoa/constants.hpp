#pragma once

#include <numbers>

namespace rydoa::constants {

// Rounded values; the presets are defined in terms of these.
inline constexpr double elementary_charge = 1.6e-19;     // C
inline constexpr double bohr_radius = 5.2e-11;           // m
inline constexpr double hbar = 1.05457e-34;              // J s
inline constexpr double bohr_magneton = 9.2740e-24;      // J/T
inline constexpr double speed_of_light = 2.9979e8;       // m/s
inline constexpr double free_space_impedance = 377.0;    // Ohm
inline constexpr double boltzmann = 1.380649e-23;        // J/K

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// nP_{1/2} <- n'S_{1/2} reduced dipole, in units of e a0.
inline constexpr double e1_dipole_ea0 = 1443.46;
inline constexpr double e1_reduced_dipole = e1_dipole_ea0 * elementary_charge * bohr_radius;

inline constexpr double mhz = two_pi * 1e6;   // 2 pi MHz in rad/s
inline constexpr double khz = two_pi * 1e3;

inline constexpr double deg = std::numbers::pi / 180.0;

}  // namespace rydoa::constants
