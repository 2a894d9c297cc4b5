#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "core/units.hpp"

namespace sdt {

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: the output block is a
// pure function of (key, counter), so any atom's stream can be regenerated
// independently of how work is partitioned.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// Sequential uniform/normal draws from the Philox stream identified by
// (seed, stream_id, substream). Two doubles per block.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream_id)),
        stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)),
        substream_(substream) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    if (cached_ == 0) refill();
    const std::uint64_t bits = cache_[2 - cached_];
    --cached_;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    // Box-Muller; discards the second variate so draws stay aligned.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * units::pi * u2);
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr{block_index_, stream_lo_, stream_hi_, substream_};
    const auto out = Philox4x32::block(ctr, key_);
    cache_[0] = (std::uint64_t{out[0]} << 32) | out[1];
    cache_[1] = (std::uint64_t{out[2]} << 32) | out[3];
    cached_ = 2;
    ++block_index_;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint32_t substream_;
  std::uint32_t block_index_ = 0;
  std::array<std::uint64_t, 2> cache_{};
  int cached_ = 0;
};

}  // namespace sdt
