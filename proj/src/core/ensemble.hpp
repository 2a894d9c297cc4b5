#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "core/lattice.hpp"
#include "core/rng.hpp"

namespace sdt {

/// Classical error channels of the transport sequence.
struct ErrorModel {
  double p_ini = 0.97;
  double p_flip = 0.955;
  // Dynamic perturbations: each pulse draws its flip probability uniformly
  // from p_flip +- p_flip_spread (clamped to [0, 1]). Zero means constant.
  double p_flip_spread = 0.0;
  double p_leak_step = 4.5e-4;
  double leak_loss = 0.0;
  double theta_offset = 0.0;  // diagnostic only

  void validate() const;
  /// Mean of the per-pulse flip probability distribution.
  double mean_flip_probability() const;
};

enum class FinalSpin { up, down, leaked };

struct TransportOutcome {
  long final_displacement = 0;  // lambda/4 units
  bool leaked = false;
  int leak_step = -1;           // 0: failed initialization; k: during shift k; -1: none
  bool lost = false;
  FinalSpin spin_final = FinalSpin::up;
};

/// One atom through L cycles (2L shifts, 2L pulses), starting in |up> at 0.
TransportOutcome sample_atom(RandomStream& rng, int cycles, const ErrorModel& model);

struct EnsembleResult {
  int cycles = 0;
  std::uint64_t atoms = 0;
  std::uint64_t lost = 0;
  std::map<long, std::uint64_t> counts;  // by final displacement, lost atoms excluded
  std::vector<TransportOutcome> outcomes;

  std::uint64_t analyzed() const { return atoms - lost; }
  double probability(long displacement) const;
  long nominal_displacement() const { return 2L * cycles; }
};

struct EnsembleOptions {
  int workers = 1;
  bool keep_outcomes = true;
};

/// Atom i draws from the Philox stream (master_seed, i, cycles), so the result
/// is identical for any worker count.
EnsembleResult run_ensemble(std::uint64_t atoms, int cycles, const ErrorModel& model,
                            std::uint64_t master_seed, const EnsembleOptions& opts = {});

struct ExactDistribution {
  std::map<long, double> probability;  // normalized over non-lost atoms
  double lost = 0.0;
};

/// Forward propagation of the same Markov chain the sampler draws from.
/// Limited to cycles <= 12.
ExactDistribution exact_distribution(int cycles, const ErrorModel& model);

double total_variation(const EnsembleResult& mc, const ExactDistribution& exact);

}  // namespace sdt
