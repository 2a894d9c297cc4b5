#include "core/lattice.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "core/error.hpp"

namespace sdt {

namespace {

struct Weights {
  double plus;
  double minus;
};

Weights weights_for(Spin spin, const LatticeConfig& cfg) {
  if (spin == Spin::up) return {1.0, 0.0};
  return {cfg.down_weights.first, cfg.down_weights.second};
}

// Root of g on [lo, hi] where g changes sign; converges to full precision.
template <class F>
double bracketed_root(F g, double lo, double hi) {
  std::uintmax_t max_iter = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, tol, max_iter);
  return 0.5 * (a + b);
}

}  // namespace

void LatticeConfig::validate() const {
  require(wavelength > 0.0, "lattice wavelength must be positive");
  require(depth > 0.0, "lattice depth must be positive");
  require(atom_mass > 0.0, "atom mass must be positive");
  require(axial_freq > 0.0 && radial_freq > 0.0, "trap frequencies must be positive");
  require(temperature >= 0.0, "temperature must be non-negative");
  require(down_weights.first >= 0.0 && down_weights.second >= 0.0,
          "down_weights must be non-negative");
  require(std::abs(down_weights.first + down_weights.second - 1.0) < 1e-12,
          "down_weights must sum to 1");
}

void RampSpec::validate() const {
  require(ramp_time > 0.0, "ramp time must be positive");
  require(theta_max >= units::pi, "theta_max must allow a full pi rotation");
}

double sigma_potential(double z, double theta, Branch branch, const LatticeConfig& cfg) {
  const double half = branch == Branch::sigma_plus ? -0.5 * theta : 0.5 * theta;
  const double c = std::cos(cfg.wave_vector() * z + half);
  return -cfg.depth * c * c;
}

double spin_potential(double z, double theta, Spin spin, const LatticeConfig& cfg) {
  const auto w = weights_for(spin, cfg);
  double u = 0.0;
  if (w.plus != 0.0) u += w.plus * sigma_potential(z, theta, Branch::sigma_plus, cfg);
  if (w.minus != 0.0) u += w.minus * sigma_potential(z, theta, Branch::sigma_minus, cfg);
  return u;
}

// -U0 cos^2(kz + a) = -U0/2 (1 + cos(2kz + 2a))
double spin_potential_dz(double z, double theta, Spin spin, const LatticeConfig& cfg) {
  const auto w = weights_for(spin, cfg);
  const double k = cfg.wave_vector();
  return cfg.depth * k *
         (w.plus * std::sin(2.0 * k * z - theta) + w.minus * std::sin(2.0 * k * z + theta));
}

double spin_potential_dz2(double z, double theta, Spin spin, const LatticeConfig& cfg) {
  const auto w = weights_for(spin, cfg);
  const double k = cfg.wave_vector();
  return 2.0 * cfg.depth * k * k *
         (w.plus * std::cos(2.0 * k * z - theta) + w.minus * std::cos(2.0 * k * z + theta));
}

Phasor spin_phasor(double theta, Spin spin, const LatticeConfig& cfg) {
  const auto w = weights_for(spin, cfg);
  const double re_scale = w.plus + w.minus;
  const double c = w.minus - w.plus;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double re = re_scale * cs;
  const double im = c * sn;
  const double mod2 = re * re + im * im;

  double phase = std::atan2(im, re);
  const double reference = c >= 0.0 ? theta : -theta;
  phase += 2.0 * units::pi * std::round((reference - phase) / (2.0 * units::pi));

  Phasor p{};
  p.modulus = std::sqrt(mod2);
  p.phase = phase;
  if (mod2 > 0.0) {
    // phase = atan(c tan(theta) / s) with s = re_scale
    const double dre = -re_scale * sn;
    const double dim = c * cs;
    const double d2re = -re;
    const double d2im = -im;
    const double num = re * dim - im * dre;
    p.dphase = num / mod2;
    const double dnum = re * d2im - im * d2re;
    const double dmod2 = 2.0 * (re * dre + im * dim);
    p.d2phase = (dnum * mod2 - num * dmod2) / (mod2 * mod2);
    p.dmodulus = 0.5 * dmod2 / p.modulus;
  }
  return p;
}

WellGeometry well_geometry(Spin spin, double theta, const LatticeConfig& cfg) {
  cfg.validate();
  const double k = cfg.wave_vector();
  const double quarter = 0.25 * cfg.wavelength;
  const auto ph = spin_phasor(theta, spin, cfg);
  if (ph.modulus < 1e-6) {
    fail(ErrorKind::numerical, "degenerate flat potential at theta = " + std::to_string(theta));
  }

  auto du = [&](double z) { return spin_potential_dz(z, theta, spin, cfg); };

  // The seed sits within a fraction of a site of the true minimum, and dU/dz
  // changes sign exactly once on (seed - lambda/4, seed + lambda/4) around it.
  const double seed = -ph.phase / (2.0 * k);
  const double margin = 0.45 * quarter;
  double lo = seed - margin;
  double hi = seed + margin;
  if (!(du(lo) < 0.0 && du(hi) > 0.0)) {
    lo = seed - 0.999 * quarter;
    hi = seed + 0.999 * quarter;
  }
  if (!(du(lo) < 0.0 && du(hi) > 0.0)) {
    fail(ErrorKind::numerical, "failed to bracket the potential minimum");
  }
  const double z_min = bracketed_root(du, lo, hi);
  const double z_max = bracketed_root(du, z_min + 0.5 * margin, z_min + 2.0 * quarter - 0.5 * margin);

  WellGeometry g{};
  g.z_min = z_min;
  g.depth = spin_potential(z_max, theta, spin, cfg) - spin_potential(z_min, theta, spin, cfg);
  g.contrast = g.depth / cfg.depth;
  if (g.contrast < 1e-6) {
    fail(ErrorKind::numerical, "degenerate flat potential at theta = " + std::to_string(theta));
  }
  const double full_curvature = 2.0 * k * k * cfg.depth;
  g.axial_freq = cfg.axial_freq * std::sqrt(spin_potential_dz2(z_min, theta, spin, cfg) / full_curvature);
  g.radial_freq = cfg.radial_freq * std::sqrt(g.contrast);
  return g;
}

double theta_trajectory(double t, const RampSpec& ramp) {
  ramp.validate();
  const double tau = ramp.ramp_time;
  if (!(t >= 0.0 && t <= tau)) {
    fail(ErrorKind::invalid_argument, "ramp time " + std::to_string(t) + " outside [0, tau]");
  }
  const double s = ramp.direction == RampDirection::forward ? t : tau - t;
  return 0.5 * units::pi * (1.0 - std::cos(units::pi * s / tau));
}

double theta_rate(double t, const RampSpec& ramp) {
  const double tau = ramp.ramp_time;
  const double s = ramp.direction == RampDirection::forward ? t : tau - t;
  const double sign = ramp.direction == RampDirection::forward ? 1.0 : -1.0;
  return sign * 0.5 * units::pi * (units::pi / tau) * std::sin(units::pi * s / tau);
}

double theta_acceleration(double t, const RampSpec& ramp) {
  const double tau = ramp.ramp_time;
  const double s = ramp.direction == RampDirection::forward ? t : tau - t;
  const double w = units::pi / tau;
  return 0.5 * units::pi * w * w * std::cos(units::pi * s / tau);
}

double ramp_voltage(double t, const RampSpec& ramp) {
  return ramp.v_zero + (ramp.v_pi - ramp.v_zero) * theta_trajectory(t, ramp) / units::pi;
}

}  // namespace sdt
