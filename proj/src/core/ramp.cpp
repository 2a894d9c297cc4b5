#include "core/ramp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <boost/math/quadrature/gauss.hpp>

#include "core/error.hpp"

namespace sdt {

namespace {

using cplx = std::complex<double>;

constexpr double kPerturbativeLimit = 0.1;

// Composite Simpson of f(t) e^{i phase(t)} on a uniform grid; phase is
// accumulated alongside with Simpson-consistent half steps.
cplx oscillatory_integral(const std::function<double(double)>& f,
                          const std::function<double(double)>& rate, double tau, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = tau / intervals;
  cplx sum{};
  double phase = 0.0;
  double prev_rate = rate(0.0);
  for (int i = 0; i <= intervals; ++i) {
    const double t = std::min(i * h, tau);
    if (i > 0) {
      // Simpson over [t - h, t] for the phase, using the midpoint rate.
      const double mid = rate(t - 0.5 * h);
      const double now = rate(t);
      phase += h / 6.0 * (prev_rate + 4.0 * mid + now);
      prev_rate = now;
    }
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f(t) * std::polar(1.0, phase);
  }
  return sum * (h / 3.0);
}

int intervals_for(double max_rate, double tau) {
  const double cycles = max_rate * tau / (2.0 * units::pi);
  return std::max(4000, static_cast<int>(std::ceil(cycles * 400.0)));
}

double clip_probability(double p, std::vector<std::string>& warnings, const char* what) {
  if (p > kPerturbativeLimit) {
    warnings.push_back(std::string(what) + ": first-order probability " + std::to_string(p) +
                       " > 0.1, perturbation theory unreliable");
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

ExcitationEstimate excitation_displacement(double omega, double distance, double tau, double mass) {
  require(omega > 0.0 && distance > 0.0 && tau > 0.0 && mass > 0.0,
          "omega, distance, tau and mass must be positive");
  const double a = units::pi / tau;
  const double amp = 0.5 * distance * a * a;  // z0'' = amp cos(a t)

  // int_0^tau cos(a t) e^{i w t} dt = i w (1 + e^{i w tau}) / (w^2 - a^2),
  // with the removable singularity at w = a equal to pi / (2a).
  cplx closed;
  if (std::abs(omega - a) < 1e-7 * a) {
    closed = amp * cplx(units::pi / (2.0 * a), 0.0);
  } else {
    const cplx e = std::polar(1.0, omega * tau);
    closed = amp * cplx(0.0, omega) * (1.0 + e) / (omega * omega - a * a);
  }

  // Independent check: fixed 30-point Gauss-Legendre panels, one per half
  // oscillation of the integrand.
  using boost::math::quadrature::gauss;
  auto re = [&](double t) { return amp * std::cos(a * t) * std::cos(omega * t); };
  auto im = [&](double t) { return amp * std::cos(a * t) * std::sin(omega * t); };
  const int panels = static_cast<int>(std::ceil((omega + a) * tau / units::pi)) + 1;
  double qre = 0.0, qim = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = tau * i / panels, hi = tau * (i + 1) / panels;
    qre += gauss<double, 30>::integrate(re, lo, hi);
    qim += gauss<double, 30>::integrate(im, lo, hi);
  }
  const double scale = amp * 2.0 * tau / units::pi;  // int |z0''| dt
  if (std::abs(closed - cplx(qre, qim)) > 1e-8 * scale) {
    fail(ErrorKind::numerical, "closed-form displacement amplitude disagrees with quadrature");
  }

  ExcitationEstimate out;
  const double p = mass / (2.0 * units::hbar * omega) * std::norm(closed);
  out.probability = clip_probability(p, out.warnings, "axial displacement");
  return out;
}

ExcitationEstimate excitation_displacement_path(const std::function<double(double)>& accel,
                                                const std::function<double(double)>& omega,
                                                double tau, double mass) {
  require(tau > 0.0 && mass > 0.0, "tau and mass must be positive");
  double wmax = 0.0;
  for (int i = 0; i <= 64; ++i) wmax = std::max(wmax, omega(tau * i / 64.0));
  auto f = [&](double t) { return std::sqrt(mass / (2.0 * units::hbar * omega(t))) * accel(t); };
  const cplx c1 = oscillatory_integral(f, omega, tau, intervals_for(wmax, tau));
  ExcitationEstimate out;
  out.probability = clip_probability(std::norm(c1), out.warnings, "axial displacement");
  return out;
}

ExcitationEstimate excitation_parametric(const std::function<double(double)>& omega, double tau) {
  require(tau > 0.0, "tau must be positive");
  const double w0 = omega(0.0);
  require(w0 > 0.0, "trap frequency must be positive");
  double wmin = w0, wmax = w0;
  for (int i = 0; i <= 256; ++i) {
    const double w = omega(tau * i / 256.0);
    require(w > 0.0, "trap frequency must stay positive over the ramp");
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
  }

  ExcitationEstimate out;
  if ((wmax - wmin) / w0 > 0.5) {
    out.warnings.push_back("parametric: modulation depth " + std::to_string((wmax - wmin) / w0) +
                           " > 0.5");
  }
  auto f = [&](double t) {
    const double w = omega(t);
    return w * w - w0 * w0;
  };
  auto rate = [&](double) { return 2.0 * w0; };
  const cplx c = oscillatory_integral(f, rate, tau, intervals_for(2.0 * w0, tau));
  out.probability = clip_probability(std::norm(c) / (8.0 * w0 * w0), out.warnings, "parametric");
  return out;
}

double well_acceleration(Spin spin, double t, double tau, const LatticeConfig& cfg) {
  const RampSpec ramp{tau};
  const double th = theta_trajectory(t, ramp);
  const auto ph = spin_phasor(th, spin, cfg);
  const double rate = theta_rate(t, ramp);
  const double acc = theta_acceleration(t, ramp);
  // z_min = -phase(theta) / 2k
  return -(ph.d2phase * rate * rate + ph.dphase * acc) / (2.0 * cfg.wave_vector());
}

double well_axial_frequency(Spin spin, double t, double tau, const LatticeConfig& cfg) {
  const RampSpec ramp{tau};
  return cfg.axial_freq * std::sqrt(spin_phasor(theta_trajectory(t, ramp), spin, cfg).modulus);
}

double well_radial_frequency(Spin spin, double t, double tau, const LatticeConfig& cfg) {
  const RampSpec ramp{tau};
  return cfg.radial_freq * std::sqrt(spin_phasor(theta_trajectory(t, ramp), spin, cfg).modulus);
}

ShiftExcitationBudget shift_budget(Spin spin, double tau, const LatticeConfig& cfg) {
  cfg.validate();
  require(tau > 0.0, "ramp time must be positive");
  ShiftExcitationBudget b;
  auto take = [&](const ExcitationEstimate& e) {
    b.warnings.insert(b.warnings.end(), e.warnings.begin(), e.warnings.end());
    return e.probability;
  };

  if (spin == Spin::up) {
    // Rigid full-contrast shift by lambda/4 at constant frequency.
    b.p_axial_displacement =
        take(excitation_displacement(cfg.axial_freq, 0.25 * cfg.wavelength, tau, cfg.atom_mass));
  } else {
    b.p_axial_displacement = take(excitation_displacement_path(
        [&](double t) { return well_acceleration(spin, t, tau, cfg); },
        [&](double t) { return well_axial_frequency(spin, t, tau, cfg); }, tau, cfg.atom_mass));
    b.p_axial_parametric = take(excitation_parametric(
        [&](double t) { return well_axial_frequency(spin, t, tau, cfg); }, tau));
    b.p_radial_parametric = take(excitation_parametric(
        [&](double t) { return well_radial_frequency(spin, t, tau, cfg); }, tau));
  }
  b.total = 1.0 - (1.0 - b.p_axial_displacement) * (1.0 - b.p_axial_parametric) *
                      (1.0 - b.p_radial_parametric);
  return b;
}

RampOptimum optimize_ramp_time(double budget, double tau_min, const LatticeConfig& cfg) {
  require(budget > 0.0 && budget < 1.0, "budget must lie in (0, 1)");
  require(tau_min > 0.0, "tau_min must be positive");
  constexpr double tau_limit = 1e-3;
  constexpr double growth = 1.01;
  constexpr double resolution = 0.5e-6;

  auto evaluate = [&](double tau) {
    return RampScanPoint{tau, shift_budget(Spin::up, tau, cfg), shift_budget(Spin::down, tau, cfg)};
  };

  RampOptimum out;
  double prev = -1.0;
  for (double tau = tau_min; tau <= tau_limit * (1.0 + 1e-12); tau *= growth) {
    out.scan.push_back(evaluate(tau));
    if (out.scan.back().worst() <= budget) {
      if (prev < 0.0) {
        out.tau = tau;
        return out;
      }
      double good = tau, bad = prev;
      while (good - bad > resolution) {
        const double mid = 0.5 * (good + bad);
        (evaluate(mid).worst() <= budget ? good : bad) = mid;
      }
      out.tau = good;
      return out;
    }
    prev = tau;
  }
  fail(ErrorKind::infeasible, "no ramp time up to 1 ms meets the excitation budget");
}

}  // namespace sdt
