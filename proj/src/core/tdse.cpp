#include "core/tdse.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "core/error.hpp"

namespace sdt {

namespace {

using cplx = std::complex<double>;

struct Box {
  std::vector<double> z;
  double dx;
};

Box make_box(const TdseGrid& g) {
  Box b;
  b.z.resize(g.points);
  // Interior points of [center - hw, center + hw]; walls sit one dx outside.
  b.dx = 2.0 * g.half_width / (g.points + 1);
  for (int i = 0; i < g.points; ++i) b.z[i] = g.center - g.half_width + (i + 1) * b.dx;
  return b;
}

// Thomas algorithm for a tridiagonal system with constant off-diagonal.
template <class T>
void solve_tridiagonal(std::vector<T> diag, T off, std::vector<T>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const T m = off / diag[i - 1];
    diag[i] -= m * off;
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off * rhs[i + 1]) / diag[i];
}

double norm2(const std::vector<cplx>& psi, double dx) {
  double s = 0.0;
  for (const auto& a : psi) s += std::norm(a);
  return s * dx;
}

// Lowest state localized at `seed`: inverse iteration on H - shift with a
// Gaussian start. Neighbouring wells stay unpopulated because the start has
// no weight there.
std::vector<cplx> localized_ground_state(const Box& box, const std::vector<double>& v, double mass,
                                         double omega, double seed) {
  const std::size_t n = box.z.size();
  const double kin = units::hbar * units::hbar / (2.0 * mass * box.dx * box.dx);
  const std::size_t i_seed = static_cast<std::size_t>(std::clamp<double>(
      std::round((seed - box.z.front()) / box.dx), 0.0, static_cast<double>(n - 1)));
  const double shift = v[i_seed] + 0.25 * units::hbar * omega;
  const double width = std::sqrt(units::hbar / (mass * omega));

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (box.z[i] - seed) / width;
    x[i] = std::exp(-0.5 * d * d);
  }
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 * kin + v[i] - shift;
  for (int it = 0; it < 60; ++it) {
    solve_tridiagonal(diag, -kin, x);
    double s = 0.0;
    for (double a : x) s += a * a;
    const double inv = 1.0 / std::sqrt(s * box.dx);
    for (double& a : x) a *= inv;
  }
  return {x.begin(), x.end()};
}

struct Evolution {
  std::vector<cplx> psi;
  double drift;
};

Evolution evolve(const Box& box, const PotentialTrajectory& potential, double mass, double omega_ref,
                 double tau, int steps, std::vector<cplx> psi) {
  const std::size_t n = box.z.size();
  const double kin = units::hbar * units::hbar / (2.0 * mass * box.dx * box.dx);
  const double dt = tau / steps;
  const cplx a(0.0, 0.5 * dt / units::hbar);
  const double n0 = norm2(psi, box.dx);

  std::vector<double> v(n);
  std::vector<cplx> lhs(n), rhs(n);
  for (int s = 0; s < steps; ++s) {
    const double t = (s + 0.5) * dt;
    for (std::size_t i = 0; i < n; ++i) v[i] = potential(box.z[i], t);
    // A time-dependent energy offset only changes the global phase; removing
    // it keeps the Cayley-form phase error small for the relevant levels.
    const double offset = *std::min_element(v.begin(), v.end()) + 0.5 * units::hbar * omega_ref;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 2.0 * kin + v[i] - offset;
      lhs[i] = 1.0 + a * h;
      const cplx left = i > 0 ? psi[i - 1] : cplx{};
      const cplx right = i + 1 < n ? psi[i + 1] : cplx{};
      rhs[i] = (1.0 - a * h) * psi[i] + a * kin * (left + right);
    }
    solve_tridiagonal(lhs, -a * kin, rhs);
    psi.swap(rhs);
  }
  const double drift = std::abs(norm2(psi, box.dx) - n0);
  return {std::move(psi), drift};
}

double excitation(const Box& box, const std::vector<cplx>& final_ground, const std::vector<cplx>& psi) {
  cplx overlap{};
  for (std::size_t i = 0; i < psi.size(); ++i) overlap += std::conj(final_ground[i]) * psi[i];
  overlap *= box.dx;
  return std::max(0.0, 1.0 - std::norm(overlap));
}

}  // namespace

TdseResult tdse_oracle(const PotentialTrajectory& potential, double tau, double mass, double omega_ref,
                       double z_initial, double z_final, const TdseGrid& grid) {
  require(tau > 0.0 && mass > 0.0 && omega_ref > 0.0, "tau, mass and omega_ref must be positive");
  require(grid.points >= 512, "TDSE grid needs at least 512 points");
  require(grid.half_width > 0.0, "TDSE grid half width must be positive");
  require(grid.steps_per_period >= 50, "time step must resolve the trap period 50-fold");

  const Box box = make_box(grid);
  std::vector<double> v0(box.z.size()), v1(box.z.size());
  for (std::size_t i = 0; i < box.z.size(); ++i) {
    v0[i] = potential(box.z[i], 0.0);
    v1[i] = potential(box.z[i], tau);
  }
  const auto start = localized_ground_state(box, v0, mass, omega_ref, z_initial);
  const auto target = localized_ground_state(box, v1, mass, omega_ref, z_final);

  const double period = 2.0 * units::pi / omega_ref;
  const int steps = std::max(8, static_cast<int>(std::ceil(tau / period * grid.steps_per_period)));

  TdseResult r;
  const auto fine = evolve(box, potential, mass, omega_ref, tau, steps, start);
  r.steps = steps;
  r.probability = excitation(box, target, fine.psi);
  r.norm_drift = fine.drift;
  if (r.norm_drift > 1e-8) {
    fail(ErrorKind::numerical, "TDSE norm drift " + std::to_string(r.norm_drift) + " exceeds 1e-8");
  }

  if (grid.check_convergence) {
    const auto coarse = evolve(box, potential, mass, omega_ref, tau, (steps + 1) / 2, start);
    r.coarse_probability = excitation(box, target, coarse.psi);
    const double diff = std::abs(r.coarse_probability - r.probability);
    if (diff > 0.05 * std::max(r.probability, r.coarse_probability) && diff > 1e-9) {
      fail(ErrorKind::numerical, "TDSE result not converged in the time step");
    }
  }
  return r;
}

PotentialTrajectory lattice_shift_potential(Spin spin, double tau, const LatticeConfig& cfg) {
  return [spin, tau, cfg](double z, double t) {
    const RampSpec ramp{tau};
    return spin_potential(z, theta_trajectory(std::clamp(t, 0.0, tau), ramp), spin, cfg);
  };
}

PotentialTrajectory lattice_contrast_potential(Spin spin, double tau, const LatticeConfig& cfg) {
  return [spin, tau, cfg](double z, double t) {
    const RampSpec ramp{tau};
    const double mod = spin_phasor(theta_trajectory(std::clamp(t, 0.0, tau), ramp), spin, cfg).modulus;
    return -0.5 * cfg.depth * (1.0 + mod * std::cos(2.0 * cfg.wave_vector() * z));
  };
}

PotentialTrajectory harmonic_shift_potential(double mass, double omega, double distance, double tau) {
  return [=](double z, double t) {
    const double s = std::clamp(t, 0.0, tau);
    const double z0 = 0.5 * distance * (1.0 - std::cos(units::pi * s / tau));
    const double d = z - z0;
    return 0.5 * mass * omega * omega * d * d;
  };
}

TdseGrid lattice_grid(Spin spin, const LatticeConfig& cfg, int points) {
  const double end = spin == Spin::up ? 0.25 * cfg.wavelength : -0.25 * cfg.wavelength;
  TdseGrid g;
  g.center = 0.5 * end;
  g.half_width = 0.75 * cfg.wavelength;
  g.points = points;
  return g;
}

}  // namespace sdt
