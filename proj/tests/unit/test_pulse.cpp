#include <cmath>
#include <vector>

#include "core/error.hpp"
#include "core/pulse.hpp"
#include "doctest.h"

using namespace sdt;
using units::pi;

namespace {

const double omega = units::khz_to_rad_per_s(60.0);

double rabi_formula(double delta, double area) {
  const double g2 = 1.0 + (delta / omega) * (delta / omega);
  const double s = std::sin(0.5 * area * std::sqrt(g2));
  return s * s / g2;
}

// Resonant drive about x with T1/T2: (v, w) relax towards a steady state
// through M = -a I + K with K^2 = (d^2 - omega^2) I.
double damped_rabi_w(double t, double w0, double t1, double t2, double w_eq) {
  const double g1 = 1.0 / t1, g2 = 1.0 / t2;
  const double ws = g1 * g2 * w_eq / (g1 * g2 + omega * omega);
  const double vs = -omega * ws / g2;
  const double a = 0.5 * (g1 + g2), d = 0.5 * (g1 - g2);
  const double mu = std::sqrt(omega * omega - d * d);
  const double x0 = 0.0 - vs, y0 = w0 - ws;
  const double c = std::cos(mu * t), s = std::sin(mu * t) / mu;
  // K = [[d, -omega], [omega, -d]] acting on (v, w)
  const double y = c * y0 + s * (omega * x0 - d * y0);
  return ws + std::exp(-a * t) * y;
}

}  // namespace

TEST_CASE("rectangular pulse follows the Rabi formula") {
  const auto rect = make_pulse(PulseKind::rectangular_pi, omega);
  CHECK(rect.duration() == doctest::Approx(pi / omega));
  for (double d_khz : {0.0, 5.0, 20.0, 60.0, 133.0}) {
    const double delta = units::khz_to_rad_per_s(d_khz);
    for (double eps : {-0.1, 0.0, 0.07}) {
      PerturbedPulse p{rect, delta, eps, {}, 1.0};
      CHECK(flip_probability(p) == doctest::Approx(rabi_formula(delta, (1 + eps) * pi)).epsilon(1e-12));
      CHECK(flip_probability(p, Spin::down) == doctest::Approx(flip_probability(p)).epsilon(1e-12));
    }
  }
  PerturbedPulse at_omega{rect, omega, 0.0, {}, 1.0};
  const double s = std::sin(pi / std::sqrt(2.0));
  CHECK(flip_probability(at_omega) == doctest::Approx(0.5 * s * s).epsilon(1e-12));
  CHECK(flip_probability(at_omega) == doctest::Approx(0.3169).epsilon(1e-3));
  PerturbedPulse short_area{rect, 0.0, -0.1, {}, 1.0};
  CHECK(flip_probability(short_area) == doctest::Approx(0.9755).epsilon(1e-4));
}

TEST_CASE("composite pulse is a net pi rotation and flattens the area error") {
  const auto comp = make_pulse(PulseKind::composite_90_225_315, omega);
  CHECK(comp.total_angle() == doctest::Approx(3.5 * pi));
  CHECK(flip_probability({comp, 0.0, 0.0, {}, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
  const auto rect = make_pulse(PulseKind::rectangular_pi, omega);
  const double d = units::khz_to_rad_per_s(40.0);
  CHECK(flip_probability({comp, d, 0.0, {}, 1.0}) > flip_probability({rect, d, 0.0, {}, 1.0}));
}

TEST_CASE("relaxation integrator matches the damped Rabi solution") {
  const double t1 = 100e-3, t2 = 100e-6;
  const RelaxationParams relax{t1, t2};
  for (int i = 1; i <= 12; ++i) {
    const double angle = i * 0.25 * pi;
    PulseSpec seg{omega, {{angle, 0.0}}, "x"};
    PerturbedPulse p{seg, 0.0, 0.0, relax, 1.0};
    const auto m = propagate(BlochVector::of(Spin::up), p);
    CHECK(std::abs(m.w - damped_rabi_w(angle / omega, -1.0, t1, t2, 1.0)) < 1e-6);
  }
}

TEST_CASE("unitary integrator route agrees with rotation composition") {
  const auto comp = make_pulse(PulseKind::composite_90_225_315, omega);
  PerturbedPulse exact{comp, units::khz_to_rad_per_s(17.0), 0.04, {}, 1.0};
  PerturbedPulse nearly = exact;
  nearly.relaxation = {1e6, 1e6};
  const auto a = propagate(BlochVector::of(Spin::up), exact);
  const auto b = propagate(BlochVector::of(Spin::up), nearly);
  CHECK(std::abs(a.u - b.u) < 1e-7);
  CHECK(std::abs(a.v - b.v) < 1e-7);
  CHECK(std::abs(a.w - b.w) < 1e-7);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("free evolution relaxes population with T1") {
  const RelaxationParams relax{1e-3, std::nullopt};
  for (double t : {1e-4, 5e-4, 2e-3}) {
    const auto m = free_evolution(BlochVector::of(Spin::up), t, 0.0, relax, 1.0);
    CHECK(m.w == doctest::Approx(1.0 - 2.0 * std::exp(-t / 1e-3)).epsilon(1e-8));
  }
}

TEST_CASE("robustness windows and their ordering") {
  const auto rect = make_pulse(PulseKind::rectangular_pi, omega);
  const auto comp = make_pulse(PulseKind::composite_90_225_315, omega);
  const double wr = units::rad_per_s_to_khz(robustness_halfwidth(rect));
  const double wc = units::rad_per_s_to_khz(robustness_halfwidth(comp));
  CHECK(wr == doctest::Approx(14.0).epsilon(0.2));
  CHECK(wc == doctest::Approx(54.0).epsilon(0.15));
  RobustnessOptions strict;
  strict.mode = AreaErrorMode::worst_case;
  CHECK(units::rad_per_s_to_khz(robustness_halfwidth(rect, strict)) < wr);
  CHECK(units::rad_per_s_to_khz(robustness_halfwidth(comp, strict)) < wc);

  // Bisection oracle for the rectangular envelope edge: with eps free in
  // [-0.1, 0.1] the best area at detuning delta is the one closest to
  // pi / sqrt(1 + x^2), so the edge solves max_eps P = 0.95.
  auto best = [&](double delta) {
    const double g = std::sqrt(1.0 + std::pow(delta / omega, 2));
    const double eps = std::clamp(1.0 / g - 1.0, -0.1, 0.1);
    return rabi_formula(delta, (1 + eps) * pi);
  };
  double lo = 0.0, hi = omega;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (best(mid) >= 0.95 ? lo : hi) = mid;
  }
  CHECK(std::abs(units::rad_per_s_to_khz(lo) - wr) < 0.15);
}

TEST_CASE("T2' inversion reproduces its own target") {
  const auto rect = make_pulse(PulseKind::rectangular_pi, omega);
  const double t2 = infer_t2prime(0.955, rect, 0.1);
  PerturbedPulse p{rect, 0.0, 0.0, {0.1, t2}, 1.0};
  CHECK(flip_probability(p) == doctest::Approx(0.955).epsilon(1e-5));
  CHECK(infer_t2prime(0.97, rect, 0.1) > t2);
}

TEST_CASE("spectrum does not depend on the worker count") {
  const auto comp = make_pulse(PulseKind::composite_90_225_315, omega);
  std::vector<double> grid;
  for (int i = -50; i <= 50; ++i) grid.push_back(units::khz_to_rad_per_s(3.0 * i));
  const auto a = spectrum(comp, grid, 0.05, {}, 1);
  const auto b = spectrum(comp, grid, 0.05, {}, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].flip_probability == b[i].flip_probability);
}

TEST_CASE("pulse validation") {
  CHECK_THROWS_AS(make_pulse(PulseKind::rectangular_pi, -1.0), Error);
  CHECK_THROWS_AS(parse_pulse_kind("gaussian"), Error);
  CHECK(parse_pulse_kind("composite") == PulseKind::composite_90_225_315);
  CHECK(to_string(PulseKind::rectangular_pi) == "rectangular_pi");
}
