#include "core/pulse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/numeric/odeint.hpp>

#include "core/error.hpp"

namespace sdt {

namespace {

using State = std::array<double, 3>;

constexpr double kRelTol = 1e-9;
constexpr double kAbsTol = 1e-12;

// Right-handed rotation of v about unit axis n by angle a (Rodrigues).
BlochVector rotate(const BlochVector& v, const State& n, double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double dot = n[0] * v.u + n[1] * v.v + n[2] * v.w;
  const State cross{n[1] * v.w - n[2] * v.v, n[2] * v.u - n[0] * v.w, n[0] * v.v - n[1] * v.u};
  return {v.u * c + cross[0] * s + n[0] * dot * (1.0 - c),
          v.v * c + cross[1] * s + n[1] * dot * (1.0 - c),
          v.w * c + cross[2] * s + n[2] * dot * (1.0 - c)};
}

// dM/dt = Omega x M - relaxation
struct BlochSystem {
  State drive;
  double gamma1;
  double gamma2;
  double w_eq;

  void operator()(const State& m, State& dm, double /*t*/) const {
    dm[0] = drive[1] * m[2] - drive[2] * m[1] - gamma2 * m[0];
    dm[1] = drive[2] * m[0] - drive[0] * m[2] - gamma2 * m[1];
    dm[2] = drive[0] * m[1] - drive[1] * m[0] - gamma1 * (m[2] - w_eq);
  }
};

BlochVector integrate(const BlochVector& start, const BlochSystem& sys, double duration) {
  namespace odeint = boost::numeric::odeint;
  State m{start.u, start.v, start.w};
  if (duration <= 0.0) return start;
  const double rate = std::sqrt(sys.drive[0] * sys.drive[0] + sys.drive[1] * sys.drive[1] +
                                sys.drive[2] * sys.drive[2]) +
                      sys.gamma1 + sys.gamma2;
  const double dt0 = rate > 0.0 ? std::min(duration, 0.01 / rate) : duration;
  try {
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(kAbsTol, kRelTol);
    odeint::integrate_adaptive(stepper, sys, m, 0.0, duration, dt0);
  } catch (const std::exception& e) {
    fail(ErrorKind::numerical, std::string("Bloch integration failed: ") + e.what());
  }
  for (double x : m) {
    if (!std::isfinite(x)) fail(ErrorKind::numerical, "Bloch integration produced non-finite state");
  }
  return {m[0], m[1], m[2]};
}

double rate_of(const std::optional<double>& t) { return t ? 1.0 / *t : 0.0; }

}  // namespace

double PulseSpec::total_angle() const {
  double a = 0.0;
  for (const auto& s : segments) a += s.angle;
  return a;
}

void PulseSpec::validate() const {
  require(rabi_freq > 0.0, "Rabi frequency must be positive");
  require(!segments.empty(), "pulse needs at least one segment");
  for (const auto& s : segments) require(s.angle > 0.0, "segment rotation angles must be positive");
}

void RelaxationParams::validate() const {
  if (t1) require(*t1 > 0.0, "T1 must be positive");
  if (t2) require(*t2 > 0.0, "T2 must be positive");
  if (t1 && t2) require(*t2 <= 2.0 * *t1, "T2 must not exceed 2 T1");
}

void PerturbedPulse::validate() const {
  base.validate();
  relaxation.validate();
  require(std::abs(area_error) < 1.0, "area error must satisfy |eps| < 1");
  require(std::abs(w_equilibrium) <= 1.0, "equilibrium w must lie in [-1, 1]");
}

double BlochVector::norm() const { return std::sqrt(u * u + v * v + w * w); }

PulseSpec make_pulse(PulseKind kind, double rabi_freq) {
  require(rabi_freq > 0.0, "Rabi frequency must be positive");
  constexpr double pi = units::pi;
  switch (kind) {
    case PulseKind::rectangular_pi:
      return {rabi_freq, {{pi, 0.0}}, "rectangular_pi"};
    case PulseKind::composite_90_225_315:
      return {rabi_freq, {{pi / 2, 0.0}, {5 * pi / 4, pi}, {7 * pi / 4, 0.0}},
              "composite_90_225_315"};
  }
  fail(ErrorKind::invalid_argument, "unknown pulse kind");
}

PulseKind parse_pulse_kind(const std::string& name) {
  if (name == "rectangular_pi" || name == "rectangular") return PulseKind::rectangular_pi;
  if (name == "composite_90_225_315" || name == "composite") return PulseKind::composite_90_225_315;
  fail(ErrorKind::invalid_argument, "unknown pulse kind '" + name + "'");
}

std::string to_string(PulseKind kind) {
  return kind == PulseKind::rectangular_pi ? "rectangular_pi" : "composite_90_225_315";
}

BlochVector propagate(const BlochVector& state, const PerturbedPulse& p) {
  p.validate();
  const double omega = p.base.rabi_freq;
  const double x = p.detuning / omega;
  const double g = std::sqrt(1.0 + x * x);

  BlochVector m = state;
  if (p.relaxation.unitary()) {
    for (const auto& seg : p.base.segments) {
      const State axis{std::cos(seg.phase) / g, std::sin(seg.phase) / g, x / g};
      m = rotate(m, axis, (1.0 + p.area_error) * seg.angle * g);
    }
    return m;
  }

  const double gamma1 = rate_of(p.relaxation.t1);
  const double gamma2 = rate_of(p.relaxation.t2);
  for (const auto& seg : p.base.segments) {
    const BlochSystem sys{{omega * std::cos(seg.phase), omega * std::sin(seg.phase), p.detuning},
                          gamma1, gamma2, p.w_equilibrium};
    m = integrate(m, sys, (1.0 + p.area_error) * seg.angle / omega);
  }
  return m;
}

BlochVector free_evolution(const BlochVector& state, double duration, double detuning,
                           const RelaxationParams& relax, double w_equilibrium) {
  relax.validate();
  require(duration >= 0.0, "duration must be non-negative");
  const BlochSystem sys{{0.0, 0.0, detuning}, rate_of(relax.t1), rate_of(relax.t2), w_equilibrium};
  return integrate(state, sys, duration);
}

double flip_probability(const PerturbedPulse& p, Spin initial) {
  const auto out = propagate(BlochVector::of(initial), p);
  const double sign = initial == Spin::up ? 1.0 : -1.0;
  return std::clamp(0.5 * (1.0 + sign * out.w), 0.0, 1.0);
}

double robustness_halfwidth(const PulseSpec& pulse, const RobustnessOptions& opts) {
  pulse.validate();
  require(opts.threshold > 0.0 && opts.threshold < 1.0, "threshold must lie in (0, 1)");
  require(opts.area_error_max >= 0.0 && opts.area_error_max < 1.0, "area_error_max must lie in [0, 1)");
  require(opts.area_error_points >= 1, "need at least one area-error sample");

  const double scan_max = opts.scan_max > 0.0 ? opts.scan_max : 5.0 * pulse.rabi_freq;
  const double step = std::min(opts.grid_step > 0.0 ? opts.grid_step : units::khz_to_rad_per_s(0.5),
                               units::khz_to_rad_per_s(0.5));
  const double tol = opts.tolerance > 0.0 ? opts.tolerance : units::khz_to_rad_per_s(0.1);

  auto p_at = [&](double delta, double eps) {
    PerturbedPulse pp{pulse, delta, eps, {}, 1.0};
    return flip_probability(pp);
  };

  // Score at one detuning: best (envelope) or worst (worst_case) over eps.
  auto score = [&](double delta) {
    const int n = opts.area_error_points;
    const double emax = opts.area_error_max;
    std::vector<double> eps(n);
    for (int i = 0; i < n; ++i) eps[i] = n == 1 ? 0.0 : -emax + 2.0 * emax * i / (n - 1);
    const bool best = opts.mode == AreaErrorMode::envelope;
    int arg = 0;
    double val = p_at(delta, eps[0]);
    for (int i = 1; i < n; ++i) {
      const double v = p_at(delta, eps[i]);
      if (best ? v > val : v < val) {
        val = v;
        arg = i;
      }
    }
    if (n < 3) return val;
    // Golden-section polish of the extremum between the neighbouring samples.
    double a = eps[std::max(arg - 1, 0)];
    double b = eps[std::min(arg + 1, n - 1)];
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double e) { return best ? -p_at(delta, e) : p_at(delta, e); };
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 40; ++it) {
      if (fc < fd) {
        b = d; d = c; fd = fc; c = b - r * (b - a); fc = f(c);
      } else {
        a = c; c = d; fc = fd; d = a + r * (b - a); fd = f(d);
      }
    }
    const double polished = best ? -std::min(fc, fd) : std::min(fc, fd);
    return best ? std::max(val, polished) : std::min(val, polished);
  };
  auto passes = [&](double delta) {
    return score(delta) >= opts.threshold && score(-delta) >= opts.threshold;
  };

  if (!passes(0.0)) return 0.0;
  double good = 0.0;
  double bad = -1.0;
  const int n_steps = static_cast<int>(std::ceil(scan_max / step));
  for (int i = 1; i <= n_steps; ++i) {
    const double d = std::min(i * step, scan_max);
    if (!passes(d)) {
      bad = d;
      break;
    }
    good = d;
  }
  if (bad < 0.0) return scan_max;
  while (bad - good > tol) {
    const double mid = 0.5 * (good + bad);
    (passes(mid) ? good : bad) = mid;
  }
  return good;
}

double infer_t2prime(double target, const PulseSpec& pulse, double t1) {
  pulse.validate();
  require(target > 0.0 && target < 1.0, "target flip probability must lie in (0, 1)");
  require(t1 > 0.0, "T1 must be positive");

  constexpr double lo_bound = 1e-7;
  constexpr double hi_bound = 1e-1;
  auto p_of = [&](double t2) {
    PerturbedPulse pp{pulse, 0.0, 0.0, {t1, std::min(t2, 2.0 * t1)}, 1.0};
    return flip_probability(pp);
  };

  const double unitary = flip_probability(PerturbedPulse{pulse, 0.0, 0.0, {}, 1.0});
  if (target > unitary) {
    fail(ErrorKind::numerical, "target flip probability exceeds the unitary maximum");
  }

  // Monotonicity of P(T2) on the bracket is part of the contract.
  double prev = -1.0;
  for (int i = 0; i <= 12; ++i) {
    const double t2 = lo_bound * std::pow(hi_bound / lo_bound, i / 12.0);
    const double p = p_of(t2);
    if (p < prev - 1e-9) fail(ErrorKind::numerical, "flip probability not monotone in T2");
    prev = p;
  }

  double lo = lo_bound, hi = hi_bound;
  const double p_lo = p_of(lo), p_hi = p_of(hi);
  if (target >= p_hi) return hi_bound;
  if (target < p_lo) fail(ErrorKind::numerical, "target flip probability below the achievable range");
  while (hi / lo - 1.0 > 1e-4) {
    const double mid = std::sqrt(lo * hi);
    (p_of(mid) < target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<SpectrumPoint> spectrum(const PulseSpec& pulse, std::span<const double> detunings,
                                    double area_error, const RelaxationParams& relax, int workers) {
  pulse.validate();
  std::vector<double> grid(detunings.begin(), detunings.end());
  std::sort(grid.begin(), grid.end());
  std::vector<SpectrumPoint> out(grid.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = {grid[i], flip_probability(PerturbedPulse{pulse, grid[i], area_error, relax, 1.0})};
    }
  };
  const std::size_t n = grid.size();
  const std::size_t nw = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (nw == 1) {
    work(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(n * w / nw, n * (w + 1) / nw);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace sdt
