#pragma once

#include <functional>

#include "core/lattice.hpp"

namespace sdt {

/// V(z, t) in joules.
using PotentialTrajectory = std::function<double(double z, double t)>;

struct TdseGrid {
  double center = 0.0;      // m
  double half_width = 0.0;  // m
  int points = 1024;        // >= 512
  int steps_per_period = 400;  // time steps per 2 pi / omega_ref, >= 50
  bool check_convergence = true;
};

struct TdseResult {
  double probability = 0.0;         // 1 - |<g_final|psi(tau)>|^2
  double coarse_probability = 0.0;  // same with twice the time step
  double norm_drift = 0.0;
  int steps = 0;
};

/// Crank-Nicolson integration of the 1D Schroedinger equation on a box with
/// hard walls. The initial state is the ground state of the well at
/// `z_initial` in V(., 0); the result projects onto the ground state of the
/// well at `z_final` in V(., tau). `omega_ref` sets the time step and the
/// inverse-iteration shift. Throws numerical error if the result changes by
/// more than 5% between the coarse and fine time step, or if the norm drifts
/// by more than 1e-8.
TdseResult tdse_oracle(const PotentialTrajectory& potential, double tau, double mass,
                       double omega_ref, double z_initial, double z_final, const TdseGrid& grid);

/// Spin potential along the forward ramp of duration tau.
PotentialTrajectory lattice_shift_potential(Spin spin, double tau, const LatticeConfig& cfg);

/// Fixed-centre lattice whose contrast follows spin's |A(theta(t))|: isolates
/// the parametric (depth modulation) part of the shift.
PotentialTrajectory lattice_contrast_potential(Spin spin, double tau, const LatticeConfig& cfg);

/// Harmonic trap moved by `distance` along the cosine ramp.
PotentialTrajectory harmonic_shift_potential(double mass, double omega, double distance, double tau);

/// Three-site grid spanning the shift of `spin`'s well.
TdseGrid lattice_grid(Spin spin, const LatticeConfig& cfg, int points = 1024);

}  // namespace sdt
