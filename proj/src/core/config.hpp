#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/ensemble.hpp"
#include "core/lattice.hpp"
#include "core/pulse.hpp"

namespace sdt {

// Config sections hold values in the units of their TOML keys so that a
// save/load round trip is exact; the to_* members convert to SI.

struct LatticeSection {
  double wavelength_nm = 865.9;
  double depth_uK = 80.0;
  double axial_freq_kHz = 115.0;
  double radial_freq_kHz = 1.0;
  double temperature_uK = 10.0;
  double atom_mass_amu = 132.905451961;
  std::array<double, 2> down_weights{0.125, 0.875};

  LatticeConfig to_model() const;
  bool operator==(const LatticeSection&) const = default;
};

struct PulseSection {
  double rabi_kHz = 60.0;
  std::string kind = "rectangular_pi";
  std::optional<double> T1_ms;
  std::optional<double> T2_us;

  PulseSpec to_pulse() const;
  PulseSpec to_pulse(PulseKind kind) const;
  RelaxationParams relaxation() const;
  bool operator==(const PulseSection&) const = default;
};

struct ErrorsSection {
  double p_ini = 0.97;
  double p_flip = 0.955;
  double p_flip_spread = 0.0;
  std::optional<double> p_leak_step;  // derived from the scattering rates if absent
  double leak_loss = 0.0;
  double theta_offset = 0.0;
  double raman_rate_Hz = 10.0;
  double rayleigh_rate_Hz = 5.0;

  bool operator==(const ErrorsSection&) const = default;
};

struct TransportSection {
  std::vector<int> L_list{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::int64_t atoms_per_L = 700;
  double ramp_time_us = 30.0;

  bool operator==(const TransportSection&) const = default;
};

struct AnalysisSection {
  double detection_sigma_lambda = 1.0 / 12.0;  // detection noise in units of lambda
  double p_ini_fit = 0.97;
  bool free_p_ini = false;
  std::vector<int> histogram_L{1, 4, 7, 10};

  bool operator==(const AnalysisSection&) const = default;
};

struct PulseMapSection {
  double delta_max_kHz = 150.0;
  double delta_step_kHz = 1.0;
  std::vector<double> area_errors{-0.1, 0.0, 0.1};

  bool operator==(const PulseMapSection&) const = default;
};

struct RobustnessSection {
  double threshold = 0.95;
  double area_error_max = 0.10;
  std::string mode = "envelope";

  RobustnessOptions to_options() const;
  bool operator==(const RobustnessSection&) const = default;
};

struct RampSection {
  double budget = 0.03;
  double tau_min_us = 14.0;

  bool operator==(const RampSection&) const = default;
};

struct BandsSection {
  int n_bands = 0;      // 0: enough for the thermal population
  int plane_waves = 0;  // 0: chosen from depth and n_bands
  int q_points = 65;

  bool operator==(const BandsSection&) const = default;
};

struct RunConfig {
  LatticeSection lattice;
  PulseSection pulse;
  ErrorsSection errors;
  TransportSection transport;
  AnalysisSection analysis;
  PulseMapSection pulse_map;
  RobustnessSection robustness;
  RampSection ramp;
  BandsSection bands;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";
  std::string format = "csv";

  RampSpec ramp_spec() const;
  /// Scattering probability per transport step,
  /// (Raman + Rayleigh rate) * (ramp time + pulse duration).
  double derived_leak_probability() const;
  ErrorModel error_model() const;

  bool operator==(const RunConfig&) const = default;
};

/// Throws Error(config) listing every violation (unknown keys, type errors,
/// out-of-range values), one per line.
RunConfig parse_config(const std::string& toml_text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

/// All violations of an in-memory config; empty when valid.
std::vector<std::string> validate_config(const RunConfig& cfg);

std::string to_toml(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

/// Canonical JSON (sorted keys, shortest round-trip numbers).
std::string canonical_json(const RunConfig& cfg);
/// FNV-1a 64 of canonical_json.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace sdt
