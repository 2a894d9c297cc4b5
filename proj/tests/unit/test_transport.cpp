#include <cmath>
#include <complex>
#include <map>
#include <random>

#include "core/ensemble.hpp"
#include "core/error.hpp"
#include "core/transport.hpp"
#include "doctest.h"

using namespace sdt;
using cplx = std::complex<double>;

namespace {

SpinPositionState random_state(std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  std::uniform_int_distribution<long> site(-5, 5);
  SpinPositionState st;
  for (int i = 0; i < 6; ++i) {
    st.add(i % 2 ? Spin::up : Spin::down, site(gen), cplx(n(gen), n(gen)));
  }
  return st;
}

// Independent enumeration of the no-leak chain: every pattern of pulse
// outcomes, with the spin-dependent step direction written out by hand.
std::map<long, double> enumerate_patterns(int cycles, double p_ini, double p_flip) {
  const int steps = 2 * cycles;
  std::map<long, double> dist;
  if (p_ini < 1.0) dist[0] += 1.0 - p_ini;
  for (unsigned mask = 0; mask < (1u << steps); ++mask) {
    long site = 0;
    bool up = true;
    double w = p_ini;
    for (int k = 0; k < steps; ++k) {
      const bool forward = k % 2 == 0;
      site += (forward ? 1 : -1) * (up ? 1 : -1);
      const bool flip = (mask >> k) & 1u;
      w *= flip ? p_flip : 1.0 - p_flip;
      if (flip) up = !up;
    }
    dist[site] += w;
  }
  return dist;
}

}  // namespace

TEST_CASE("shift and pulse operators act on basis states") {
  const TransportPhases ph{0.3, -1.1};
  auto s = apply_shift(SpinPositionState::basis(Spin::up, 2), ShiftDirection::forward, ph);
  CHECK(std::abs(s.amplitude(Spin::up, 3) - std::polar(1.0, 0.3)) < 1e-15);
  s = apply_shift(SpinPositionState::basis(Spin::down, 2), ShiftDirection::forward, ph);
  CHECK(std::abs(s.amplitude(Spin::down, 1) - std::polar(1.0, -1.1)) < 1e-15);
  s = apply_shift(SpinPositionState::basis(Spin::up, 2), ShiftDirection::backward, ph);
  CHECK(std::abs(s.amplitude(Spin::up, 1) - std::polar(1.0, 0.3)) < 1e-15);
  s = apply_pi_pulse_ideal(SpinPositionState::basis(Spin::up, 4));
  CHECK(std::abs(s.amplitude(Spin::down, 4) - cplx(0, 1)) < 1e-15);
}

TEST_CASE("sequence equals the closed form for superpositions") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> phase(-M_PI, M_PI);
  for (int cycles = 0; cycles <= 6; ++cycles) {
    for (int trial = 0; trial < 20; ++trial) {
      const TransportPhases ph{phase(gen), phase(gen)};
      const auto st = random_state(gen);
      const auto a = evolve_transport(st, cycles, ph);
      const auto b = transport_closed_form(st, cycles, ph);
      CHECK(SpinPositionState::max_difference(a, b) < 1e-12);
      CHECK(a.norm_squared() == doctest::Approx(st.norm_squared()).epsilon(1e-12));
    }
  }
}

TEST_CASE("closed form against hand-written amplitudes") {
  const TransportPhases ph{0.4, 0.9};
  for (int L = 0; L <= 6; ++L) {
    const auto out = transport_closed_form(SpinPositionState::basis(Spin::up, 0), L, ph);
    const cplx expect = std::pow(-1.0, L) * std::polar(1.0, (0.4 + 0.9) * L);
    CHECK(std::abs(out.amplitude(Spin::up, 2 * L) - expect) < 1e-12);
    const auto dn = transport_closed_form(SpinPositionState::basis(Spin::down, 1), L, ph);
    CHECK(std::abs(dn.amplitude(Spin::down, 1 - 2 * L) - expect) < 1e-12);
  }
}

TEST_CASE("exact distribution equals pattern enumeration") {
  for (int L = 0; L <= 6; ++L) {
    ErrorModel m;
    m.p_leak_step = 0.0;
    m.p_flip = 0.83;
    m.p_ini = 0.9;
    const auto exact = exact_distribution(L, m);
    const auto brute = enumerate_patterns(L, m.p_ini, m.p_flip);
    REQUIRE(exact.probability.size() == brute.size());
    for (const auto& [site, p] : brute) CHECK(std::abs(exact.probability.at(site) - p) < 1e-12);
    CHECK(exact.probability.at(2 * L) ==
          doctest::Approx(L == 0 ? 1.0 : 0.9 * std::pow(0.83, 2 * L - 1)).epsilon(1e-12));
  }
}

TEST_CASE("a single failed pulse j leaves the atom at 2j - 2L") {
  for (int L = 1; L <= 5; ++L) {
    for (int j = 1; j <= 2 * L; ++j) {
      long site = 0;
      bool up = true;
      for (int k = 1; k <= 2 * L; ++k) {
        const bool forward = k % 2 == 1;
        site += (forward == up) ? 1 : -1;
        if (k != j) up = !up;
      }
      CHECK(site == 2 * j - 2 * L);
    }
  }
}

TEST_CASE("Monte Carlo matches the exact chain") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int model = 0; model < 6; ++model) {
    ErrorModel m;
    m.p_ini = 0.8 + 0.2 * u(gen);
    m.p_flip = 0.7 + 0.3 * u(gen);
    m.p_flip_spread = model % 2 ? 0.1 * u(gen) : 0.0;
    m.p_leak_step = 0.02 * u(gen);
    m.leak_loss = model % 3 == 0 ? u(gen) : 0.0;
    const int L = 1 + model % 4;
    const auto mc = run_ensemble(40000, L, m, 77 + model, {1, false});
    const auto ex = exact_distribution(L, m);
    CHECK(total_variation(mc, ex) < 0.015);
    const double lost = double(mc.lost) / mc.atoms;
    CHECK(std::abs(lost - ex.lost) < 5 * std::sqrt(ex.lost * (1 - ex.lost) / mc.atoms) + 1e-12);
  }
}

TEST_CASE("ensembles are independent of the worker partition") {
  ErrorModel m;
  m.p_flip_spread = 0.02;
  m.leak_loss = 0.3;
  const auto a = run_ensemble(5001, 4, m, 123, {1, true});
  const auto b = run_ensemble(5001, 4, m, 123, {3, true});
  const auto c = run_ensemble(5001, 4, m, 123, {7, true});
  CHECK(a.counts == b.counts);
  CHECK(a.counts == c.counts);
  REQUIRE(a.outcomes.size() == c.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    CHECK(a.outcomes[i].final_displacement == c.outcomes[i].final_displacement);
    CHECK(a.outcomes[i].leak_step == c.outcomes[i].leak_step);
  }
  const auto d = run_ensemble(5001, 4, m, 124, {1, false});
  CHECK(a.counts != d.counts);
}

TEST_CASE("perfect model transports every atom") {
  ErrorModel m{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  const auto r = run_ensemble(1000, 3, m, 1, {});
  CHECK(r.probability(6) == 1.0);
  CHECK(r.outcomes.front().spin_final == FinalSpin::up);
  m.p_ini = 0.0;
  const auto z = run_ensemble(10, 3, m, 1, {});
  CHECK(z.probability(0) == 1.0);
  CHECK(z.outcomes.front().leak_step == 0);
}

TEST_CASE("mean flip probability of a clamped uniform spread") {
  ErrorModel m;
  m.p_flip = 0.95;
  m.p_flip_spread = 0.1;
  // a quarter of U(0.85, 1.05) lies above 1 and is clamped there
  CHECK(m.mean_flip_probability() == doctest::Approx(0.75 * 0.925 + 0.25).epsilon(1e-12));
  m.p_flip = 1.2;
  CHECK_THROWS_AS(m.validate(), Error);
  CHECK_THROWS_AS(exact_distribution(13, ErrorModel{}), Error);
}
