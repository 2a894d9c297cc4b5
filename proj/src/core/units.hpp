#pragma once

#include <numbers>

// SI constants (CODATA 2018) and the unit conversions used at the config
// boundary. Everything inside the core is SI.
namespace sdt::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J / K
inline constexpr double amu = 1.66053906660e-27;     // kg
inline constexpr double cesium133_mass = 132.905451961 * amu;

inline constexpr double nm = 1e-9;
inline constexpr double us = 1e-6;
inline constexpr double ms = 1e-3;

constexpr double micro_kelvin_to_joule(double uK) { return uK * 1e-6 * k_boltzmann; }
constexpr double joule_to_micro_kelvin(double J) { return J / k_boltzmann * 1e6; }
constexpr double khz_to_rad_per_s(double kHz) { return 2.0 * pi * kHz * 1e3; }
constexpr double rad_per_s_to_khz(double w) { return w / (2.0 * pi * 1e3); }

}  // namespace sdt::units
