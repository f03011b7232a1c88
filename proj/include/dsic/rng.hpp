#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dsic/types.hpp"

namespace dsic {

/// Addresses one logical random stream. Every random quantity in a run is
/// drawn from a (master_seed, stream_id, trial_index) triple, so any trial
/// of any experiment can be regenerated in isolation and parallel consumers
/// see the same numbers no matter which thread touches them first.
struct StreamSeed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
  std::uint64_t trial = 0;

  StreamSeed(std::uint64_t m) : master(m) {}  // NOLINT: implicit on purpose
  StreamSeed(std::uint64_t m, std::uint64_t s, std::uint64_t t)
      : master(m), stream(s), trial(t) {}

  StreamSeed with_trial(std::uint64_t t) const { return {master, stream, t}; }
  StreamSeed with_stream(std::uint64_t s) const { return {master, s, trial}; }
};

/// Counter-based generator (Philox4x32-10). Stateless per draw: the value at
/// draw_index is a pure function of (seed triple, draw_index), which makes
/// sequences independent of evaluation order and safe to generate from any
/// thread. One 128-bit block yields two doubles.
class CounterRng {
public:
  explicit CounterRng(StreamSeed seed) {
    // Mix the triple into a 64-bit key and a 64-bit block prefix.
    std::uint64_t h = splitmix64(seed.master);
    key0_ = static_cast<std::uint32_t>(h);
    key1_ = static_cast<std::uint32_t>(h >> 32);
    std::uint64_t hi = splitmix64(h ^ splitmix64(seed.stream + 0x632BE59BD9B4E019ull));
    hi = splitmix64(hi ^ splitmix64(seed.trial + 0x9E3779B97F4A7C15ull));
    block2_ = static_cast<std::uint32_t>(hi);
    block3_ = static_cast<std::uint32_t>(hi >> 32);
  }

  /// Two independent uniforms in (0,1] from block #draw_index.
  void uniform_pair(std::uint64_t draw_index, double& u0, double& u1) const {
    std::uint32_t x0 = static_cast<std::uint32_t>(draw_index);
    std::uint32_t x1 = static_cast<std::uint32_t>(draw_index >> 32);
    std::uint32_t x2 = block2_;
    std::uint32_t x3 = block3_;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ull * x0;
      std::uint64_t p1 = 0xCD9E8D57ull * x2;
      std::uint32_t y0 = static_cast<std::uint32_t>(p1 >> 32) ^ x1 ^ k0;
      std::uint32_t y1 = static_cast<std::uint32_t>(p1);
      std::uint32_t y2 = static_cast<std::uint32_t>(p0 >> 32) ^ x3 ^ k1;
      std::uint32_t y3 = static_cast<std::uint32_t>(p0);
      x0 = y0; x1 = y1; x2 = y2; x3 = y3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    u0 = to_unit(x0, x1);
    u1 = to_unit(x2, x3);
  }

  double uniform(std::uint64_t draw_index) const {
    double u0, u1;
    uniform_pair(draw_index, u0, u1);
    return u0;
  }

  /// Standard circular complex Gaussian CN(0,1): squared amplitude is
  /// Exp(1), phase is uniform. Consumes one block.
  cplx gaussian(std::uint64_t draw_index) const {
    double u0, u1;
    uniform_pair(draw_index, u0, u1);
    double amp = std::sqrt(-std::log(u0));
    double ph = 2.0 * std::numbers::pi * u1;
    return cplx(amp * std::cos(ph), amp * std::sin(ph));
  }

private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  // 53-bit mantissa from two words, mapped to (0,1] so log() is always safe.
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    std::uint64_t r = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((r >> 11) + 1) * 0x1.0p-53;
  }

  std::uint32_t key0_, key1_, block2_, block3_;
};

// Stream ids used across the library. Keeping them in one table prevents two
// different random quantities from aliasing the same stream.
namespace streams {
constexpr std::uint64_t pilot = 1;
constexpr std::uint64_t data = 2;
constexpr std::uint64_t channel = 3;
constexpr std::uint64_t tx_noise_pilot = 4;
constexpr std::uint64_t rx_noise_pilot = 5;
constexpr std::uint64_t tx_noise_data = 6;
constexpr std::uint64_t rx_noise_data = 7;
constexpr std::uint64_t pa_fit = 8;
constexpr std::uint64_t ensemble = 9;
constexpr std::uint64_t misc = 10;
}  // namespace streams

}  // namespace dsic
