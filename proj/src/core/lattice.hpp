#pragma once

#include <utility>

#include "core/units.hpp"

namespace sdt {

enum class Spin { up, down };
enum class Branch { sigma_plus, sigma_minus };
enum class RampDirection { forward, backward };

inline Spin flipped(Spin s) { return s == Spin::up ? Spin::down : Spin::up; }

/// Physical stage of the lin-theta-lin lattice, SI units throughout.
///
/// `down_weights` are the fractions of the sigma+ and sigma- standing waves
/// seen by the |down> state; |up> always sees the pure sigma+ wave.
struct LatticeConfig {
  double wavelength = 865.9 * units::nm;
  double depth = units::micro_kelvin_to_joule(80.0);
  double atom_mass = units::cesium133_mass;
  double axial_freq = units::khz_to_rad_per_s(115.0);
  double radial_freq = units::khz_to_rad_per_s(1.0);
  double temperature = 10e-6;
  std::pair<double, double> down_weights{1.0 / 8.0, 7.0 / 8.0};

  double wave_vector() const { return 2.0 * units::pi / wavelength; }
  double recoil_energy() const {
    const double p = units::hbar * wave_vector();
    return p * p / (2.0 * atom_mass);
  }
  double depth_in_recoils() const { return depth / recoil_energy(); }

  /// Throws sdt::Error(invalid_argument) on the first violated invariant.
  void validate() const;
};

struct RampSpec {
  double ramp_time = 30 * units::us;
  RampDirection direction = RampDirection::forward;
  double v_zero = 0.0;
  double v_pi = 1.0;
  double theta_max = 1.7 * units::pi;

  void validate() const;
};

struct WellGeometry {
  double z_min;       // m, continuously tracked from the theta = 0 minimum
  double depth;       // J, barrier height above z_min
  double axial_freq;  // rad/s
  double radial_freq; // rad/s
  double contrast;    // depth / U0
};

/// -U0 cos^2(kz -+ theta/2) for the sigma+ (sigma-) standing wave.
double sigma_potential(double z, double theta, Branch branch, const LatticeConfig& cfg);

/// U_up = U_+, U_down = w+ U_+ + w- U_-.
double spin_potential(double z, double theta, Spin spin, const LatticeConfig& cfg);
double spin_potential_dz(double z, double theta, Spin spin, const LatticeConfig& cfg);
double spin_potential_dz2(double z, double theta, Spin spin, const LatticeConfig& cfg);

// The spin potential is -U0/2 [1 + |A| cos(2kz + phase)] with the phasor
// A = w+ e^{-i theta} + w- e^{+i theta}. These expose |A| and the phase
// (unwrapped so it is continuous in theta) together with theta-derivatives.
struct Phasor {
  double modulus;
  double phase;
  double dphase;   // d phase / d theta
  double d2phase;  // d^2 phase / d theta^2
  double dmodulus;
};
Phasor spin_phasor(double theta, Spin spin, const LatticeConfig& cfg);

/// Numerical well geometry: the minimum is located as the bracketed root of
/// dU/dz seeded by the phasor estimate. Throws numerical error when the
/// potential is flat (depth < 1e-6 U0).
WellGeometry well_geometry(Spin spin, double theta, const LatticeConfig& cfg);

/// theta(t) for the half-normalized cosine ramp; forward runs 0 -> pi.
double theta_trajectory(double t, const RampSpec& ramp);
double theta_rate(double t, const RampSpec& ramp);
double theta_acceleration(double t, const RampSpec& ramp);

/// Drive voltage for the ramp, linear in theta between V0 and Vpi.
double ramp_voltage(double t, const RampSpec& ramp);

}  // namespace sdt
