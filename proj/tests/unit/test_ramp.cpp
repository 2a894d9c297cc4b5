#include <cmath>
#include <complex>

#include "core/error.hpp"
#include "core/ramp.hpp"
#include "core/tdse.hpp"
#include "doctest.h"

using namespace sdt;
using units::pi;

namespace {

const LatticeConfig cfg;
const double mass = cfg.atom_mass;
const double omega = cfg.axial_freq;

// m / (2 hbar w) |int z0'' e^{i w t}|^2 by composite Simpson.
double displacement_pt(double w, double d, double tau) {
  const int n = 20000;
  const double h = tau / n;
  std::complex<double> acc;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double acc_t = 0.5 * d * (pi / tau) * (pi / tau) * std::cos(pi * t / tau);
    acc += weight * acc_t * std::polar(1.0, w * t);
  }
  acc *= h / 3.0;
  return mass / (2.0 * units::hbar * w) * std::norm(acc);
}

TdseGrid harmonic_grid(double d) {
  const double x0 = std::sqrt(units::hbar / (mass * omega));
  TdseGrid g;
  g.center = 0.5 * d;
  g.half_width = 0.5 * d + 14.0 * x0;
  g.points = 1024;
  return g;
}

}  // namespace

TEST_CASE("displacement amplitude agrees with direct quadrature") {
  for (double tau : {3e-6, 10e-6, 30e-6, 47e-6}) {
    const double d = cfg.wavelength / 4;
    const auto e = excitation_displacement(omega, d, tau, mass);
    CHECK(e.probability == doctest::Approx(std::min(1.0, displacement_pt(omega, d, tau))).epsilon(1e-8));
  }
}

TEST_CASE("displacement excitation scales with the square of the distance") {
  const double tau = 12e-6;
  const double p1 = excitation_displacement(omega, 20e-9, tau, mass).probability;
  const double p2 = excitation_displacement(omega, 40e-9, tau, mass).probability;
  CHECK(p2 == doctest::Approx(4.0 * p1).epsilon(1e-12));
}

TEST_CASE("path integral reduces to the rigid closed form") {
  const double tau = 25e-6, d = cfg.wavelength / 4;
  const double a = pi / tau;
  auto accel = [&](double t) { return 0.5 * d * a * a * std::cos(a * t); };
  auto w = [&](double) { return omega; };
  CHECK(excitation_displacement_path(accel, w, tau, mass).probability ==
        doctest::Approx(excitation_displacement(omega, d, tau, mass).probability).epsilon(1e-6));
}

TEST_CASE("parametric excitation vanishes for a constant trap") {
  auto w = [&](double) { return omega; };
  CHECK(excitation_parametric(w, 20e-6).probability == 0.0);
  auto w2 = [&](double t) { return omega * (1.0 + 0.01 * std::sin(pi * t / 20e-6)); };
  const double p1 = excitation_parametric(w2, 20e-6).probability;
  auto w3 = [&](double t) { return omega * (1.0 + 0.02 * std::sin(pi * t / 20e-6)); };
  CHECK(p1 > 0.0);
  CHECK(excitation_parametric(w3, 20e-6).probability == doctest::Approx(4.0 * p1).epsilon(0.03));
}

TEST_CASE("up-spin budget is the rigid displacement") {
  for (double tau : {20e-6, 30e-6}) {
    const auto b = shift_budget(Spin::up, tau, cfg);
    const auto rigid = excitation_displacement(omega, cfg.wavelength / 4, tau, mass).probability;
    CHECK(b.p_axial_displacement == doctest::Approx(rigid).epsilon(1e-6));
    CHECK(b.p_axial_parametric < 1e-12);
    CHECK(b.total <= 1.0);
  }
  CHECK(shift_budget(Spin::up, 100e-6, cfg).total < shift_budget(Spin::up, 20e-6, cfg).total);
}

TEST_CASE("ramp optimum grows when the trap softens") {
  const auto stiff = optimize_ramp_time(0.03, 14e-6, cfg);
  LatticeConfig soft = cfg;
  soft.axial_freq *= 0.5;
  const auto relaxed = optimize_ramp_time(0.03, 14e-6, soft);
  CHECK(relaxed.tau > stiff.tau);
  CHECK(stiff.scan.back().worst() <= 0.03);
  CHECK(shift_budget(Spin::down, stiff.tau, cfg).total <= 0.03);
}

TEST_CASE("TDSE sudden displacement gives the Franck-Condon loss") {
  const double d = 20e-9;
  const double period = 2 * pi / omega;
  const double tau = 1e-3 * period;
  const auto r = tdse_oracle(harmonic_shift_potential(mass, omega, d, tau), tau, mass, omega, 0.0, d,
                             harmonic_grid(d));
  const double fc = 1.0 - std::exp(-mass * omega * d * d / (2.0 * units::hbar));
  CHECK(r.probability == doctest::Approx(fc).epsilon(2e-3));
  CHECK(r.norm_drift < 1e-10);
}

TEST_CASE("TDSE forced oscillator matches the coherent-state result") {
  const double d = 30e-9, tau = 7e-6;
  const double pt = excitation_displacement(omega, d, tau, mass).probability;
  const auto r = tdse_oracle(harmonic_shift_potential(mass, omega, d, tau), tau, mass, omega, 0.0, d,
                             harmonic_grid(d));
  CHECK(r.probability == doctest::Approx(1.0 - std::exp(-pt)).epsilon(0.02));
  const auto r2 = tdse_oracle(harmonic_shift_potential(mass, omega, 2 * d, tau), tau, mass, omega, 0.0,
                              2 * d, harmonic_grid(2 * d));
  CHECK(r2.probability == doctest::Approx(1.0 - std::exp(-4.0 * pt)).epsilon(0.02));
}

TEST_CASE("TDSE static lattice stays in its ground state") {
  auto v = [](double z, double) { return spin_potential(z, 0.0, Spin::up, cfg); };
  const auto r = tdse_oracle(v, 20e-6, mass, omega, 0.0, 0.0, lattice_grid(Spin::up, cfg));
  CHECK(r.probability < 1e-8);
}

TEST_CASE("TDSE adiabatic up-spin shift") {
  const double tau = 300e-6;
  const auto r = tdse_oracle(lattice_shift_potential(Spin::up, tau, cfg), tau, mass, omega, 0.0,
                             cfg.wavelength / 4, lattice_grid(Spin::up, cfg));
  CHECK(r.probability < 1e-4);
}

TEST_CASE("oracle input validation") {
  TdseGrid g = harmonic_grid(1e-8);
  g.points = 100;
  CHECK_THROWS_AS(tdse_oracle(harmonic_shift_potential(mass, omega, 1e-8, 1e-6), 1e-6, mass, omega, 0, 1e-8, g),
                  Error);
  CHECK_THROWS_AS(excitation_displacement(omega, -1.0, 1e-6, mass), Error);
}
