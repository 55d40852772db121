// Deterministic PRNG used everywhere randomness is needed. The standard
// library distributions are implementation-defined, so seeded runs would not
// be reproducible across toolchains; this generator is fully specified.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace swifm {

// splitmix64 step (Steele/Lea/Flood mixing constants).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive an independent stream seed from a base seed and a stream tag, so
// consumers (model init, epoch shuffling, per-run splits) never share draws.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (stream + 1));
  return splitmix64_next(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-1, 1).
  double next_signed() { return 2.0 * next_double() - 1.0; }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t next_below(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  // Zero-mean Gaussian via Box-Muller. Consumes two draws per call.
  double next_gaussian(double stddev) {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    return stddev * r * std::cos(6.283185307179586476925287 * u2);
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace swifm
