#include "core/transport.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace sdt {

using Amplitude = SpinPositionState::Amplitude;

Amplitude SpinPositionState::amplitude(Spin s, long site) const {
  const auto it = amps_.find({s, site});
  return it == amps_.end() ? Amplitude{} : it->second;
}

void SpinPositionState::set(Spin s, long site, Amplitude a) {
  if (a == Amplitude{}) {
    amps_.erase({s, site});
  } else {
    amps_[{s, site}] = a;
  }
}

void SpinPositionState::add(Spin s, long site, Amplitude a) { set(s, site, amplitude(s, site) + a); }

double SpinPositionState::norm_squared() const {
  double n = 0.0;
  for (const auto& [key, a] : amps_) n += std::norm(a);
  return n;
}

double SpinPositionState::max_difference(const SpinPositionState& a, const SpinPositionState& b) {
  double worst = 0.0;
  for (const auto& [key, amp] : a.amps_) {
    worst = std::max(worst, std::abs(amp - b.amplitude(key.first, key.second)));
  }
  for (const auto& [key, amp] : b.amps_) {
    worst = std::max(worst, std::abs(amp - a.amplitude(key.first, key.second)));
  }
  return worst;
}

SpinPositionState apply_shift(const SpinPositionState& state, ShiftDirection dir,
                              const TransportPhases& phases) {
  const long up_step = dir == ShiftDirection::forward ? 1 : -1;
  const Amplitude up_phase = std::polar(1.0, phases.up);
  const Amplitude down_phase = std::polar(1.0, phases.down);
  SpinPositionState out;
  for (const auto& [key, a] : state.amplitudes()) {
    const auto [spin, site] = key;
    if (spin == Spin::up) {
      out.add(spin, site + up_step, up_phase * a);
    } else {
      out.add(spin, site - up_step, down_phase * a);
    }
  }
  return out;
}

SpinPositionState apply_pi_pulse_ideal(const SpinPositionState& state) {
  const Amplitude i{0.0, 1.0};
  SpinPositionState out;
  for (const auto& [key, a] : state.amplitudes()) out.add(flipped(key.first), key.second, i * a);
  return out;
}

SpinPositionState evolve_transport(const SpinPositionState& state, int cycles,
                                   const TransportPhases& phases) {
  require(cycles >= 0, "number of transport cycles must be non-negative");
  SpinPositionState s = state;
  for (int c = 0; c < cycles; ++c) {
    s = apply_shift(s, ShiftDirection::forward, phases);
    s = apply_pi_pulse_ideal(s);
    s = apply_shift(s, ShiftDirection::backward, phases);
    s = apply_pi_pulse_ideal(s);
  }
  return s;
}

SpinPositionState transport_closed_form(const SpinPositionState& state, int cycles,
                                        const TransportPhases& phases) {
  require(cycles >= 0, "number of transport cycles must be non-negative");
  const double sign = cycles % 2 == 0 ? 1.0 : -1.0;
  const Amplitude factor = sign * std::polar(1.0, (phases.up + phases.down) * cycles);
  SpinPositionState out;
  for (const auto& [key, a] : state.amplitudes()) {
    const auto [spin, site] = key;
    const long moved = spin == Spin::up ? site + 2L * cycles : site - 2L * cycles;
    out.add(spin, moved, factor * a);
  }
  return out;
}

}  // namespace sdt
