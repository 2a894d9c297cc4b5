#pragma once

#include <vector>

#include "core/lattice.hpp"

namespace sdt {

struct BandEdges {
  int index;
  double min_energy;  // units of E_r
  double max_energy;
  double width() const { return max_energy - min_energy; }
};

/// Bands of p^2/2m - U0 cos^2(kz), energies in recoil units. The potential
/// runs from -s (well bottom) to 0 (barrier top). `energies[n][i]` is band n
/// at quasi-momentum q_i = i / (quasi_momentum_points - 1) in units of k,
/// covering the half zone [0, 1] (E(q) = E(-q)).
struct BandStructure {
  double depth_in_recoils = 0.0;
  int plane_waves = 0;
  int quasi_momentum_points = 0;
  std::vector<BandEdges> bands;
  std::vector<std::vector<double>> energies;
  bool converged = false;
  double convergence_change = 0.0;  // max |edge shift| with 1.5x plane waves
};

/// Plane-wave diagonalization. `plane_waves` must be >= 2 n_bands + 1;
/// the cutoff is re-run at 1.5x and `converged` records whether every
/// requested band edge moved by less than 1e-8 E_r.
BandStructure band_structure(double depth_in_recoils, int n_bands, int plane_waves,
                             int quasi_momentum_points = 65);

/// Thermally averaged per-shift delocalization probability: bands are
/// Boltzmann weighted at cfg.temperature; each contributes
/// 1 - exp(-width * tau / hbar), bands entirely above the barrier count as 1.
/// Throws numerical error if `bands` is not converged or truncates a
/// non-negligible thermal population.
double shift_tunneling_probability(const LatticeConfig& cfg, const RampSpec& ramp,
                                   const BandStructure& bands);

/// Number of bands needed to hold the thermal population at cfg.temperature
/// (Boltzmann tail below 1e-14), with a floor of 4.
int thermal_band_count(const LatticeConfig& cfg);

/// Plane-wave cutoff that converges the lowest n_bands at depth s.
int default_plane_waves(double depth_in_recoils, int n_bands);

}  // namespace sdt
