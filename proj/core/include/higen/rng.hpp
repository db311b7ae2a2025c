#ifndef HIGEN_RNG_HPP
#define HIGEN_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace higen {

/// Deterministic random stream. All draws go through our own inversion
/// routines (never std:: distributions, whose output is
/// implementation-defined), so a seed pins results across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    // Rejection sampling on the top bits keeps the draw exactly uniform.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_below(i)]);
    }
  }

  /// Derives an independent stream keyed on (seed, key words). Substreams
  /// depend only on the original seed, not on how much this stream has
  /// been consumed.
  Rng substream(std::initializer_list<std::uint64_t> key) const {
    std::uint64_t h = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
    for (std::uint64_t k : key) h = mix(h ^ mix(k));
    return Rng(h);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace higen

#endif  // HIGEN_RNG_HPP
