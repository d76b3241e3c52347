// Deterministic random number streams.
//
// All stochastic code in the library draws from RngStream so that a run is
// reproducible from a single master seed. Distributions are implemented here
// instead of through <random> adapters because the standard distributions are
// not guaranteed to produce the same sequences across implementations.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace wiretap {

// One step of the SplitMix64 generator; used for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0, 1); safe as a log() argument.
  double uniform01_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform value with the given number of low bits set at random, nbits <= 32.
  std::uint32_t bits(int nbits) {
    if (nbits <= 0) return 0;
    return static_cast<std::uint32_t>(next_u64() >> (64 - nbits));
  }

  // Uniform integer in [0, n); unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent substream from a master seed and a textual label.
// Distinct labels give decorrelated streams; the mapping is deterministic.
inline RngStream derive_stream(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label bytes
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  std::uint64_t state = master ^ h;
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  return RngStream(a ^ (b << 1));
}

}  // namespace wiretap
