#ifndef MASSCOVER_RNG_HPP
#define MASSCOVER_RNG_HPP

#include <cstdint>
#include <span>

namespace masscover {

// Algorithm identifier for reproducibility records. "sm64c-v1" is the
// splitmix64 finalizer applied to seed + counter * golden ratio; the stream
// is a pure function of (seed, counter), identical on every platform.
inline constexpr const char* kRngAlgorithm = "sm64c-v1";

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed. Used for per-chunk Monte Carlo
/// streams and per-n codebook streams.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(salt + kGolden));
}

/// Counter-based generator: stateless aside from the counter position.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return mix64(seed_ + (++counter_) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Samples an index from a cumulative distribution (cdf.back() ~ 1).
inline std::size_t sample_categorical(CounterRng& rng, std::span<const double> cdf) {
  double u = rng.next_double();
  std::size_t lo = 0, hi = cdf.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (u < cdf[mid])
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace masscover

#endif
