#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core/commands.hpp"
#include "core/config.hpp"
#include "core/error.hpp"
#include "core/output.hpp"
#include "doctest.h"

using namespace sdt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(SDT_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no sdt::Error thrown");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("defaults describe the reference experiment") {
  const RunConfig c;
  const auto m = c.lattice.to_model();
  CHECK(m.wavelength == doctest::Approx(865.9e-9));
  CHECK(units::joule_to_micro_kelvin(m.depth) == doctest::Approx(80.0));
  CHECK(units::rad_per_s_to_khz(m.axial_freq) == doctest::Approx(115.0));
  CHECK(m.down_weights.first == 0.125);
  CHECK(c.errors.p_ini == 0.97);
  CHECK(c.errors.p_flip == 0.955);
  CHECK(units::rad_per_s_to_khz(c.pulse.to_pulse().rabi_freq) == doctest::Approx(60.0));
  CHECK(c.transport.ramp_time_us == 30.0);
  CHECK(c.analysis.detection_sigma_lambda == doctest::Approx(1.0 / 12.0));
  // (10 + 5) / s x (30 + 8.33) us
  CHECK(c.derived_leak_probability() == doctest::Approx(15.0 * (30e-6 + 1.0 / 120e3)).epsilon(1e-12));
  CHECK(c.error_model().p_leak_step == doctest::Approx(5.75e-4));
  CHECK(validate_config(c).empty());
}

TEST_CASE("toml round trip is exact") {
  RunConfig c;
  c.seed = 12345678901234ull;
  c.lattice.depth_uK = 81.234567890123;
  c.pulse.T2_us = 95.5;
  c.errors.p_leak_step = 3.3e-4;
  c.transport.L_list = {2, 3, 5};
  c.analysis.free_p_ini = true;
  c.robustness.mode = "worst_case";
  c.format = "json";
  const auto text = to_toml(c);
  CHECK(text.find("0.96999999999999997") == std::string::npos);
  const auto back = parse_config(text);
  CHECK(back == c);
  CHECK(config_hash(back) == config_hash(c));

  const auto dir = scratch("roundtrip");
  save_config(c, (dir / "run.toml").string());
  CHECK(load_config((dir / "run.toml").string()) == c);
}

TEST_CASE("every field changes the hash") {
  const RunConfig base;
  std::vector<std::function<void(RunConfig&)>> edits{
      [](RunConfig& c) { c.lattice.wavelength_nm += 1; },
      [](RunConfig& c) { c.lattice.depth_uK += 1; },
      [](RunConfig& c) { c.lattice.axial_freq_kHz += 1; },
      [](RunConfig& c) { c.lattice.radial_freq_kHz += 1; },
      [](RunConfig& c) { c.lattice.temperature_uK += 1; },
      [](RunConfig& c) { c.lattice.atom_mass_amu += 1; },
      [](RunConfig& c) { c.lattice.down_weights = {0.25, 0.75}; },
      [](RunConfig& c) { c.pulse.rabi_kHz += 1; },
      [](RunConfig& c) { c.pulse.kind = "composite_90_225_315"; },
      [](RunConfig& c) { c.pulse.T1_ms = 100.0; },
      [](RunConfig& c) { c.pulse.T2_us = 100.0; },
      [](RunConfig& c) { c.errors.p_ini = 0.9; },
      [](RunConfig& c) { c.errors.p_flip = 0.9; },
      [](RunConfig& c) { c.errors.p_flip_spread = 0.01; },
      [](RunConfig& c) { c.errors.p_leak_step = 1e-4; },
      [](RunConfig& c) { c.errors.leak_loss = 0.5; },
      [](RunConfig& c) { c.errors.theta_offset = 0.01; },
      [](RunConfig& c) { c.errors.raman_rate_Hz = 11; },
      [](RunConfig& c) { c.errors.rayleigh_rate_Hz = 6; },
      [](RunConfig& c) { c.transport.L_list = {1, 2}; },
      [](RunConfig& c) { c.transport.atoms_per_L = 10; },
      [](RunConfig& c) { c.transport.ramp_time_us = 31; },
      [](RunConfig& c) { c.analysis.detection_sigma_lambda = 0.1; },
      [](RunConfig& c) { c.analysis.p_ini_fit = 0.96; },
      [](RunConfig& c) { c.analysis.free_p_ini = true; },
      [](RunConfig& c) { c.analysis.histogram_L = {2}; },
      [](RunConfig& c) { c.pulse_map.delta_max_kHz = 100; },
      [](RunConfig& c) { c.pulse_map.delta_step_kHz = 2; },
      [](RunConfig& c) { c.pulse_map.area_errors = {0.0}; },
      [](RunConfig& c) { c.robustness.threshold = 0.9; },
      [](RunConfig& c) { c.robustness.area_error_max = 0.05; },
      [](RunConfig& c) { c.robustness.mode = "worst_case"; },
      [](RunConfig& c) { c.ramp.budget = 0.02; },
      [](RunConfig& c) { c.ramp.tau_min_us = 10; },
      [](RunConfig& c) { c.bands.n_bands = 6; },
      [](RunConfig& c) { c.bands.plane_waves = 41; },
      [](RunConfig& c) { c.bands.q_points = 33; },
      [](RunConfig& c) { c.seed = 1; },
      [](RunConfig& c) { c.output_dir = "elsewhere"; },
      [](RunConfig& c) { c.format = "json"; },
  };
  std::set<std::uint64_t> seen{config_hash(base)};
  for (const auto& edit : edits) {
    RunConfig c = base;
    edit(c);
    CHECK(seen.insert(config_hash(c)).second);
  }
  CHECK(hash_hex(0xabcULL) == "0000000000000abc");
}

TEST_CASE("unknown keys and bad values are all reported") {
  try {
    parse_config("[lattice]\ncolor = 'blue'\ndepth_uK = -3\n[pulse]\nrabi_kHz = 'fast'\n[mystery]\n");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    const std::string msg = e.what();
    CHECK(msg.find("lattice.color") != std::string::npos);
    CHECK(msg.find("pulse.rabi_kHz") != std::string::npos);
    CHECK(msg.find("mystery") != std::string::npos);
    CHECK(msg.find("depth_uK") != std::string::npos);
  }
  CHECK(kind_of([] { parse_config("[lattice\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config("[lattice]\ndown_weights = [0.5, 0.6]\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config("[transport]\natoms_per_L = 1.5\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { load_config("/nonexistent/run.toml"); }) != ErrorKind::invalid_argument);
}

TEST_CASE("tables serialize with shortest numbers") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-20) == "1e-20");
  Table t;
  t.columns = {"a", "b", "c"};
  t.add({std::int64_t{3}, 0.25, std::string("x")});
  CHECK(t.to_csv() == "a,b,c\n3,0.25,x\n");
  CHECK(t.to_json()[0]["b"] == 0.25);

  const auto dir = scratch("tables");
  ArtifactWriter w(dir.string(), {"unit", 7, 9});
  w.add_table("t", t, "csv");
  const auto files = w.commit();
  CHECK(files.size() == 1);
  CHECK(fs::exists(dir / "t.csv.meta.json"));
  const auto csv = read_csv((dir / "t.csv").string());
  CHECK(csv.rows.at(0).at(csv.column("b")) == "0.25");
  CHECK(kind_of([&] { csv.column("zzz"); }) == ErrorKind::config);
  const auto meta = nlohmann::json::parse(slurp(dir / "t.csv.meta.json"));
  CHECK(meta["command"] == "unit");
  CHECK(meta["seed"] == 9);
}

TEST_CASE("simulate, fit and analyze through the command layer") {
  RunConfig c;
  c.transport.L_list = {1, 2, 3, 4};
  c.transport.atoms_per_L = 3000;
  c.analysis.histogram_L = {2};
  const auto dir = scratch("commands");

  CommandOptions unseeded;
  unseeded.out_dir = dir.string();
  CHECK(kind_of([&] { run_command("simulate-transport", c, unseeded); }) == ErrorKind::config);
  CHECK(fs::is_empty(dir));

  CommandOptions o;
  o.seed = 2024;
  o.out_dir = dir.string();
  const auto sim = run_command("simulate-transport", c, o);
  CHECK(fs::exists(dir / "transport_L4.csv"));
  CHECK(fs::exists(dir / "transport_points.csv"));
  CHECK(fs::exists(dir / "transport_summary.json"));

  CommandOptions f;
  f.out_dir = (dir / "fit").string();
  f.inputs = {dir.string()};
  run_command("fit-efficiency", c, f);
  const auto fit = nlohmann::json::parse(slurp(dir / "fit" / "fit_efficiency.json"));
  const double p = fit["p_flip_hat"];
  const double s = fit["sigma"];
  CHECK(std::abs(p - 0.955 * (1 - c.derived_leak_probability())) < 4 * s + 1e-3);
  CHECK(fit["points"].size() == 4);

  CommandOptions h = f;
  h.seed = 5;
  h.out_dir = (dir / "hist").string();
  run_command("analyze-histogram", c, h);
  CHECK(fs::exists(dir / "hist" / "hist_L2_dense.csv"));
  CHECK(kind_of([&] { run_command("no-such-command", c, o); }) == ErrorKind::config);
}
