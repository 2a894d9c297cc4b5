#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/lattice.hpp"

namespace sdt {

struct ExcitationEstimate {
  double probability = 0.0;  // clipped to [0, 1]
  std::vector<std::string> warnings;
};

/// First-order 0 -> 1 probability for a harmonic trap of frequency `omega`
/// rigidly displaced by `distance` along the cosine ramp
/// z0(t) = d [1 - cos(pi t / tau)] / 2:
///   P = m / (2 hbar omega) |int_0^tau z0''(t) e^{i omega t} dt|^2.
/// Closed form, cross-checked against adaptive quadrature.
ExcitationEstimate excitation_displacement(double omega, double distance, double tau, double mass);

/// Same transition for an arbitrary centre trajectory with acceleration
/// `accel(t)` in a trap of instantaneous frequency `omega(t)`; the phase is
/// the accumulated int omega dt.
ExcitationEstimate excitation_displacement_path(const std::function<double(double)>& accel,
                                                const std::function<double(double)>& omega,
                                                double tau, double mass);

/// First-order 0 -> 2 probability for the frequency modulation
/// H' = m (omega(t)^2 - omega0^2) x^2 / 2 with omega0 = omega(0):
///   P = |int_0^tau (omega^2 - omega0^2) e^{2 i omega0 t} dt|^2 / (8 omega0^2).
ExcitationEstimate excitation_parametric(const std::function<double(double)>& omega, double tau);

struct ShiftExcitationBudget {
  double p_axial_displacement = 0.0;
  double p_axial_parametric = 0.0;
  double p_radial_parametric = 0.0;
  double total = 0.0;  // 1 - prod(1 - p_i)
  std::vector<std::string> warnings;
};

/// Vibrational excitation budget of one shift (forward cosine ramp).
ShiftExcitationBudget shift_budget(Spin spin, double tau, const LatticeConfig& cfg);

struct RampScanPoint {
  double tau;
  ShiftExcitationBudget up;
  ShiftExcitationBudget down;
  double worst() const { return up.total > down.total ? up.total : down.total; }
};

struct RampOptimum {
  double tau = 0.0;
  std::vector<RampScanPoint> scan;  // geometric grid up to the chosen tau
};

/// Smallest tau >= tau_min (geometric grid, then bisection to 0.5 us) whose
/// worst spin budget is <= budget. Throws infeasible past 1 ms.
RampOptimum optimize_ramp_time(double budget, double tau_min, const LatticeConfig& cfg);

/// Centre acceleration and instantaneous axial frequency of `spin`'s well
/// along the forward ramp of duration tau.
double well_acceleration(Spin spin, double t, double tau, const LatticeConfig& cfg);
double well_axial_frequency(Spin spin, double t, double tau, const LatticeConfig& cfg);
double well_radial_frequency(Spin spin, double t, double tau, const LatticeConfig& cfg);

}  // namespace sdt
