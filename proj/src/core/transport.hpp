#pragma once

#include <complex>
#include <map>
#include <utility>

#include "core/lattice.hpp"

namespace sdt {

enum class ShiftDirection { forward, backward };

struct TransportPhases {
  double up = 0.0;
  double down = 0.0;
};

/// Pure state on spin (x) position, positions in lambda/4 units. Only
/// non-zero amplitudes are stored.
class SpinPositionState {
 public:
  using Amplitude = std::complex<double>;
  using Key = std::pair<Spin, long>;

  SpinPositionState() = default;
  static SpinPositionState basis(Spin s, long site) {
    SpinPositionState st;
    st.set(s, site, 1.0);
    return st;
  }

  Amplitude amplitude(Spin s, long site) const;
  void set(Spin s, long site, Amplitude a);
  void add(Spin s, long site, Amplitude a);

  double norm_squared() const;
  const std::map<Key, Amplitude>& amplitudes() const { return amps_; }

  /// Largest |a - b| over the union of supports.
  static double max_difference(const SpinPositionState& a, const SpinPositionState& b);

 private:
  std::map<Key, Amplitude> amps_;
};

/// S_fw: |up,l> -> e^{i phi_up}|up,l+1>, |down,l> -> e^{i phi_down}|down,l-1>;
/// S_bw moves the sites the other way with the same phases.
SpinPositionState apply_shift(const SpinPositionState& state, ShiftDirection dir,
                              const TransportPhases& phases);

/// U_pi: |s,l> -> i |-s,l>.
SpinPositionState apply_pi_pulse_ideal(const SpinPositionState& state);

/// (U_pi S_bw U_pi S_fw)^L applied operator by operator.
SpinPositionState evolve_transport(const SpinPositionState& state, int cycles,
                                   const TransportPhases& phases);

/// Closed form of the 2L-step sequence:
/// |up,l> -> (-1)^L e^{i(phi_up+phi_down)L} |up,l+2L>, down moves to l-2L.
SpinPositionState transport_closed_form(const SpinPositionState& state, int cycles,
                                        const TransportPhases& phases);

}  // namespace sdt
