#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace eigenshift {

// SplitMix64 finalizer. Full avalanche, bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based splittable stream. Every draw is a pure function of
// (master seed, stream id, index): no hidden state, so output is identical
// no matter how work is chunked across threads or in what order entries
// are evaluated. Streams index independent trials; indices address entries
// within a trial. Keep one draw type per logical substream so index spaces
// never overlap.
class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t stream)
      : key_(mix64(master ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t bits(std::uint64_t index) const {
    return mix64(key_ ^ mix64(index));
  }

  // Uniform on (0,1]; never 0, so it is safe under log().
  double unit(std::uint64_t index) const {
    return static_cast<double>((bits(index) >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes indices 2i and 2i+1.
  double gauss(std::uint64_t i) const {
    const double u1 = unit(2 * i);
    const double u2 = unit(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double rademacher(std::uint64_t index) const {
    return (bits(index) & 1ULL) ? 1.0 : -1.0;
  }

  // Uniform on (-K, K].
  double uniform_sym(std::uint64_t index, double K) const {
    return K * (2.0 * unit(index) - 1.0);
  }

 private:
  std::uint64_t key_;
};

}  // namespace eigenshift
