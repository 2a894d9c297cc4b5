#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "sdt/sdt.h"

namespace fs = std::filesystem;

TEST_CASE("config handles") {
  sdt_config* a = nullptr;
  REQUIRE(sdt_config_default(&a) == SDT_OK);
  char* text = nullptr;
  REQUIRE(sdt_config_to_toml(a, &text) == SDT_OK);
  sdt_config* b = nullptr;
  REQUIRE(sdt_config_parse(text, &b) == SDT_OK);
  sdt_string_free(text);
  int eq = 0;
  CHECK(sdt_config_equal(a, b, &eq) == SDT_OK);
  CHECK(eq == 1);
  uint64_t ha = 0, hb = 0;
  sdt_config_hash(a, &ha);
  sdt_config_set_seed(b, 7);
  sdt_config_hash(b, &hb);
  CHECK(ha != hb);
  double leak = 0;
  CHECK(sdt_config_leak_probability(a, &leak) == SDT_OK);
  CHECK(leak == doctest::Approx(5.75e-4));
  sdt_config_free(a);
  sdt_config_free(b);

  sdt_config* bad = nullptr;
  CHECK(sdt_config_parse("[lattice]\ncolor = 1\n", &bad) == SDT_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(sdt_last_error()).find("lattice.color") != std::string::npos);
  CHECK(sdt_config_load("/nonexistent.toml", &bad) != SDT_OK);
  CHECK(sdt_config_default(nullptr) == SDT_ERR_INVALID_ARGUMENT);
}

TEST_CASE("physics entry points") {
  sdt_config* c = nullptr;
  REQUIRE(sdt_config_default(&c) == SDT_OK);
  sdt_well_geometry g{};
  REQUIRE(sdt_well_geometry_at(c, SDT_SPIN_DOWN, M_PI / 2, &g) == SDT_OK);
  CHECK(g.contrast == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(g.depth_uK == doctest::Approx(60.0).epsilon(1e-9));
  double u = 0;
  REQUIRE(sdt_spin_potential(c, SDT_SPIN_UP, 0.0, 0.0, &u) == SDT_OK);
  CHECK(u == doctest::Approx(-80.0));
  sdt_config_free(c);

  sdt_pulse_params p{SDT_PULSE_RECTANGULAR_PI, 60.0, 60.0, 0.0, 0.0, 0.0};
  double f = 0;
  REQUIRE(sdt_flip_probability(&p, SDT_SPIN_UP, &f) == SDT_OK);
  const double s = std::sin(M_PI / std::sqrt(2.0));
  CHECK(f == doctest::Approx(0.5 * s * s).epsilon(1e-12));
  double w = 0;
  REQUIRE(sdt_robustness_halfwidth(SDT_PULSE_RECTANGULAR_PI, 60.0, 0.95, 0.1, SDT_AREA_ENVELOPE, &w) == SDT_OK);
  CHECK(w == doctest::Approx(14.0).epsilon(0.2));
  CHECK(sdt_robustness_halfwidth(SDT_PULSE_RECTANGULAR_PI, 60.0, 1.5, 0.1, SDT_AREA_ENVELOPE, &w) ==
        SDT_ERR_INVALID_ARGUMENT);

  long site = 0;
  sdt_classify_site(0.6 * 865.9, 865.9, &site);
  CHECK(site == 1);
  double rel = 0;
  sdt_classification_reliability(865.9 / 12, 865.9, &rel);
  CHECK(rel > 0.997);
}

TEST_CASE("ensembles through the C interface") {
  sdt_error_model m{};
  REQUIRE(sdt_error_model_default(&m) == SDT_OK);
  m.p_leak_step = 0.0;
  sdt_ensemble* e1 = nullptr;
  sdt_ensemble* e2 = nullptr;
  REQUIRE(sdt_ensemble_run(20000, 3, &m, 9, 1, &e1) == SDT_OK);
  REQUIRE(sdt_ensemble_run(20000, 3, &m, 9, 4, &e2) == SDT_OK);
  uint64_t n = 0, lost = 0;
  sdt_ensemble_size(e1, &n, &lost);
  CHECK(n == 20000);
  CHECK(lost == 0);
  double p1 = 0, p2 = 0, exact = 0;
  sdt_ensemble_probability(e1, 6, &p1);
  sdt_ensemble_probability(e2, 6, &p2);
  sdt_exact_probability(3, &m, 6, &exact);
  CHECK(p1 == p2);
  CHECK(exact == doctest::Approx(m.p_ini * std::pow(m.p_flip, 5)).epsilon(1e-12));
  CHECK(std::abs(p1 - exact) < 5 * std::sqrt(exact * (1 - exact) / 20000));
  sdt_outcome o{};
  CHECK(sdt_ensemble_outcome(e1, 0, &o) == SDT_OK);
  CHECK(sdt_ensemble_outcome(e1, 20000, &o) == SDT_ERR_INVALID_ARGUMENT);
  sdt_ensemble_free(e1);
  sdt_ensemble_free(e2);

  sdt_efficiency_point pts[11];
  for (int L = 1; L <= 11; ++L) pts[L - 1] = {2 * L, 0.97 * std::pow(0.955, 2 * L - 1), 1000};
  sdt_efficiency_fit fit{};
  REQUIRE(sdt_fit_efficiency(pts, 11, 0.97, 0, &fit) == SDT_OK);
  CHECK(fit.p_flip_hat == doctest::Approx(0.955).epsilon(1e-9));
  CHECK(fit.dof == 10);
}

TEST_CASE("batch commands") {
  int count = 0;
  for (const char* const* n = sdt_command_names(); *n; ++n) ++count;
  CHECK(count == 8);

  sdt_config* c = nullptr;
  REQUIRE(sdt_config_parse("[transport]\nL_list = [1, 2]\natoms_per_L = 100\n", &c) == SDT_OK);
  const fs::path out = fs::path(SDT_TEST_TMP) / "capi_run";
  fs::remove_all(out);
  const std::string out_s = out.string();
  sdt_run_options o{};
  o.out_dir = out_s.c_str();
  char* summary = nullptr;
  CHECK(sdt_run_command("simulate-transport", c, &o, &summary) == SDT_ERR_CONFIG);
  o.has_seed = 1;
  o.seed = 3;
  REQUIRE(sdt_run_command("simulate-transport", c, &o, &summary) == SDT_OK);
  REQUIRE(summary != nullptr);
  CHECK(std::strstr(summary, "transport_L2.csv") != nullptr);
  sdt_string_free(summary);
  CHECK(fs::exists(out / "transport_L1.csv.meta.json"));
  CHECK(sdt_run_command("bogus", c, &o, nullptr) == SDT_ERR_CONFIG);
  sdt_config_free(c);
}
