#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/lattice.hpp"

namespace sdt {

enum class PulseKind { rectangular_pi, composite_90_225_315 };

struct PulseSegment {
  double angle;  // rad, > 0
  double phase;  // rad
};

struct PulseSpec {
  double rabi_freq = 0.0;  // rad/s
  std::vector<PulseSegment> segments;
  std::string label;

  double total_angle() const;
  double duration() const { return total_angle() / rabi_freq; }
  void validate() const;
};

struct RelaxationParams {
  std::optional<double> t1;  // s
  std::optional<double> t2;  // s

  bool unitary() const { return !t1 && !t2; }
  void validate() const;
};

// w = -1 is |up>, w = +1 is |down> (the lower hyperfine level).
struct BlochVector {
  double u = 0.0;
  double v = 0.0;
  double w = -1.0;

  double norm() const;
  static BlochVector of(Spin s) { return {0.0, 0.0, s == Spin::up ? -1.0 : 1.0}; }
};

struct PerturbedPulse {
  PulseSpec base;
  double detuning = 0.0;    // rad/s, static over the pulse
  double area_error = 0.0;  // fractional
  RelaxationParams relaxation;
  double w_equilibrium = 1.0;

  void validate() const;
};

PulseSpec make_pulse(PulseKind kind, double rabi_freq);
PulseKind parse_pulse_kind(const std::string& name);
std::string to_string(PulseKind kind);

/// Exact rotation composition when unitary; otherwise adaptive integration
/// of the Bloch equations (rtol 1e-9). Integrator failure throws.
BlochVector propagate(const BlochVector& state, const PerturbedPulse& p);

/// Free evolution (no drive) at detuning `detuning` for `duration`, with
/// relaxation. Used for the T1-decay checks.
BlochVector free_evolution(const BlochVector& state, double duration, double detuning,
                           const RelaxationParams& relax, double w_equilibrium = 1.0);

/// Population transferred to the opposite spin state.
double flip_probability(const PerturbedPulse& p, Spin initial = Spin::up);

enum class AreaErrorMode {
  // P >= threshold must be reachable by some |eps| <= eps_max at each detuning
  // (projection of the (delta, eps) robustness region onto the delta axis).
  envelope,
  // P >= threshold must hold for every |eps| <= eps_max.
  worst_case,
};

struct RobustnessOptions {
  double threshold = 0.95;
  double area_error_max = 0.10;
  AreaErrorMode mode = AreaErrorMode::envelope;
  double scan_max = 0.0;   // rad/s; 0 selects 5 Omega
  double grid_step = 0.0;  // rad/s; 0 selects 2pi x 0.5 kHz
  double tolerance = 0.0;  // rad/s; 0 selects 2pi x 0.1 kHz
  int area_error_points = 41;
};

/// Largest delta_half with the threshold met on all |delta| <= delta_half.
/// Returns 0 if the threshold is missed at delta = 0 and the scan edge if it
/// is never missed.
double robustness_halfwidth(const PulseSpec& pulse, const RobustnessOptions& opts = {});

/// Root of flip_probability(T2) = target by bisection on log T2 over
/// [1e-7, 1e-1] s. Returns the bracket top when the target lies between the
/// T2 = 0.1 s value and the unitary maximum.
double infer_t2prime(double target_flip, const PulseSpec& pulse, double t1);

struct SpectrumPoint {
  double detuning;
  double flip_probability;
};

/// Pointwise flip probability, sorted by detuning. `workers` > 1 fans the
/// grid out to threads; results do not depend on the partitioning.
std::vector<SpectrumPoint> spectrum(const PulseSpec& pulse, std::span<const double> detunings,
                                    double area_error, const RelaxationParams& relax,
                                    int workers = 1);

}  // namespace sdt
