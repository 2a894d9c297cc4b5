#include <cmath>

#include "core/bands.hpp"
#include "core/error.hpp"
#include "doctest.h"

using namespace sdt;
using units::pi;

namespace {

// Asymptotic Mathieu characteristic value with q = s / 4, w = 2n + 1,
// shifted to the -s ... 0 potential convention.
double mathieu_level(double s, int n) {
  const double q = s / 4.0, w = 2.0 * n + 1.0, r = std::sqrt(q);
  const double a = -2.0 * q + 2.0 * w * r - (w * w + 1.0) / 8.0 - (w * w * w + 3.0 * w) / (128.0 * r) -
                   (5.0 * std::pow(w, 4) + 34.0 * w * w + 9.0) / (4096.0 * q);
  return a - s / 2.0;
}

// Asymptotic width of the Mathieu band n.
double mathieu_width(double s, int n) {
  const double q = s / 4.0;
  return std::pow(2.0, 4 * n + 5) / std::tgamma(n + 1.0) * std::sqrt(2.0 / pi) * std::pow(q, 0.5 * n + 0.75) *
         std::exp(-4.0 * std::sqrt(q));
}

}  // namespace

TEST_CASE("deep-lattice levels follow the harmonic plus quartic expansion") {
  const double s = 50.0;
  const auto b = band_structure(s, 4, default_plane_waves(s, 4));
  REQUIRE(b.converged);
  for (int n = 0; n < 2; ++n) {
    const double centre = 0.5 * (b.bands[n].min_energy + b.bands[n].max_energy);
    CHECK(std::abs(centre - mathieu_level(s, n)) < (n == 0 ? 3e-3 : 3e-2));
  }
  CHECK(b.bands[0].width() == doctest::Approx(mathieu_width(s, 0)).epsilon(0.15));
  CHECK(b.bands[1].width() == doctest::Approx(mathieu_width(s, 1)).epsilon(0.25));
  for (int n = 0; n + 1 < 4; ++n) CHECK(b.bands[n].max_energy < b.bands[n + 1].min_energy);
}

TEST_CASE("free-particle limit") {
  const auto b = band_structure(1e-9, 3, 21, 33);
  // E = q^2 - shifted by the vanishing potential; lowest band spans [0, 1]
  CHECK(b.bands[0].min_energy == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(b.bands[0].max_energy == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(b.energies[0][16] == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("tunneling estimate at the default lattice") {
  const LatticeConfig cfg;
  const int n = thermal_band_count(cfg);
  const auto b = band_structure(cfg.depth_in_recoils(), n, default_plane_waves(cfg.depth_in_recoils(), n));
  RampSpec ramp;
  const double p = shift_tunneling_probability(cfg, ramp, b);
  CHECK(p > 1e-5);
  CHECK(p < 1e-3);
  RampSpec longer = ramp;
  longer.ramp_time *= 2;
  CHECK(shift_tunneling_probability(cfg, longer, b) > p);
}

TEST_CASE("band structure input checks") {
  CHECK_THROWS_AS(band_structure(10.0, 5, 5), Error);
  const LatticeConfig cfg;
  const auto truncated = band_structure(cfg.depth_in_recoils(), 1, 15);
  CHECK_THROWS_AS(shift_tunneling_probability(cfg, RampSpec{}, truncated), Error);
}
