#include "core/bands.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "core/error.hpp"

namespace sdt {

namespace {

// Lowest n eigenvalues of the plane-wave Hamiltonian at quasi-momentum q.
// Basis e^{i(q + 2j)kz}, j = -M..M; -s cos^2(kz) = -s/2 - s/4 (e^{2ikz} + c.c.)
// couples neighbours only, so the matrix is tridiagonal.
Eigen::VectorXd bloch_energies(double s, double q, int plane_waves) {
  const int m = plane_waves / 2;
  Eigen::VectorXd diag(plane_waves);
  Eigen::VectorXd off = Eigen::VectorXd::Constant(plane_waves - 1, -0.25 * s);
  for (int j = -m; j <= m; ++j) {
    const double p = q + 2.0 * j;
    diag(j + m) = p * p - 0.5 * s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::numerical, "tridiagonal eigen solver failed");
  }
  return solver.eigenvalues();
}

std::vector<std::vector<double>> band_table(double s, int n_bands, int plane_waves, int nq) {
  std::vector<std::vector<double>> e(n_bands, std::vector<double>(nq));
  for (int i = 0; i < nq; ++i) {
    const double q = static_cast<double>(i) / (nq - 1);
    const auto ev = bloch_energies(s, q, plane_waves);
    for (int n = 0; n < n_bands; ++n) e[n][i] = ev(n);
  }
  return e;
}

// Band edges in 1D sit at q = 0 or q = 1; the grid includes both.
std::vector<BandEdges> edges_of(const std::vector<std::vector<double>>& e) {
  std::vector<BandEdges> out;
  out.reserve(e.size());
  for (std::size_t n = 0; n < e.size(); ++n) {
    const auto [lo, hi] = std::minmax_element(e[n].begin(), e[n].end());
    out.push_back({static_cast<int>(n), *lo, *hi});
  }
  return out;
}

int odd_at_least(int n) { return n % 2 == 0 ? n + 1 : n; }

}  // namespace

BandStructure band_structure(double s, int n_bands, int plane_waves, int nq) {
  require(s >= 0.0, "depth in recoils must be non-negative");
  require(n_bands >= 1, "need at least one band");
  require(plane_waves >= 2 * n_bands + 1, "plane_waves must be >= 2 n_bands + 1");
  require(nq >= 2, "need at least two quasi-momentum points");
  plane_waves = odd_at_least(plane_waves);

  BandStructure bs;
  bs.depth_in_recoils = s;
  bs.plane_waves = plane_waves;
  bs.quasi_momentum_points = nq;
  bs.energies = band_table(s, n_bands, plane_waves, nq);
  bs.bands = edges_of(bs.energies);

  const int refined = odd_at_least(plane_waves + (plane_waves + 1) / 2);
  const auto check = edges_of(band_table(s, n_bands, refined, nq));
  double worst = 0.0;
  for (int n = 0; n < n_bands; ++n) {
    worst = std::max({worst, std::abs(check[n].min_energy - bs.bands[n].min_energy),
                      std::abs(check[n].max_energy - bs.bands[n].max_energy)});
  }
  bs.convergence_change = worst;
  bs.converged = worst <= 1e-8;
  return bs;
}

int thermal_band_count(const LatticeConfig& cfg) {
  const double s = cfg.depth_in_recoils();
  const double kT = units::k_boltzmann * cfg.temperature / cfg.recoil_energy();
  // Highest energy of interest above the well bottom; beyond the barrier the
  // bands approach free-particle ones, E_n ~ n^2 - s.
  const double e_top = s + 32.0 * kT;
  int n = static_cast<int>(std::ceil(std::sqrt(e_top + s))) + 2;
  return std::max(n, 4);
}

int default_plane_waves(double s, int n_bands) {
  return odd_at_least(2 * n_bands + 2 * static_cast<int>(std::ceil(std::sqrt(std::max(s, 0.0)))) + 41);
}

double shift_tunneling_probability(const LatticeConfig& cfg, const RampSpec& ramp,
                                   const BandStructure& bands) {
  cfg.validate();
  ramp.validate();
  if (!bands.converged) {
    fail(ErrorKind::numerical, "band structure not converged (edge change " +
                                   std::to_string(bands.convergence_change) + " Er)");
  }
  require(!bands.bands.empty(), "empty band structure");

  const double er = cfg.recoil_energy();
  const double rate_scale = er * ramp.ramp_time / units::hbar;
  auto delocalized = [&](const BandEdges& b) {
    if (b.min_energy > 0.0) return 1.0;
    return -std::expm1(-b.width() * rate_scale);
  };

  if (cfg.temperature == 0.0) return delocalized(bands.bands.front());

  const double beta = er / (units::k_boltzmann * cfg.temperature);
  const double ground = bands.bands.front().min_energy;
  const int nq = bands.quasi_momentum_points;

  // Band populations: trapezoid mean of exp(-beta E(q)) over the half zone.
  std::vector<double> weight(bands.bands.size());
  double z = 0.0;
  for (std::size_t n = 0; n < bands.bands.size(); ++n) {
    double acc = 0.0;
    for (int i = 0; i < nq; ++i) {
      const double f = std::exp(-beta * (bands.energies[n][i] - ground));
      acc += (i == 0 || i == nq - 1) ? 0.5 * f : f;
    }
    weight[n] = acc / (nq - 1);
    z += weight[n];
  }
  if (weight.back() / z > 1e-12) {
    fail(ErrorKind::numerical, "band set truncates thermal population; request more bands");
  }

  double p = 0.0;
  for (std::size_t n = 0; n < bands.bands.size(); ++n) {
    p += weight[n] / z * delocalized(bands.bands[n]);
  }
  return p;
}

}  // namespace sdt
