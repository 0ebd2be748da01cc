#pragma once

#include <cmath>
#include <cstdint>
#include <iterator>
#include <numbers>
#include <string_view>

namespace voltwatch::rng {

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// Everything stochastic in the project (weight init, shuffling, synthetic
// telemetry, fault placement) flows through this generator so that a run is
// reproducible bit-for-bit across platforms and standard libraries.  Core is
// splitmix64; floating-point mappings are spelled out explicitly instead of
// relying on std::uniform_real_distribution, whose output is
// implementation-defined.
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1): top 53 bits scaled down.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n); n must be nonzero.  Modulo bias is ~n/2^64,
  // irrelevant at the sizes used here.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Fisher-Yates.
  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Named substreams.
//
// substream(seed, "vehicle", 3) yields a seed that depends only on the base
// seed, the label, and the indices — never on how many draws other streams
// have consumed.  This is what makes per-vehicle generation independent of
// fleet size and iteration order.
// ---------------------------------------------------------------------------

namespace detail {
inline std::uint64_t mix_in(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  std::uint64_t s = h;
  return splitmix64(s);
}
}  // namespace detail

inline std::uint64_t substream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = seed;
  for (unsigned char c : name) h = detail::mix_in(h, c);
  return detail::mix_in(h, 0x5eedULL);
}

inline std::uint64_t substream(std::uint64_t seed, std::string_view name,
                               std::uint64_t a) {
  return detail::mix_in(substream(seed, name), a);
}

inline std::uint64_t substream(std::uint64_t seed, std::string_view name,
                               std::uint64_t a, std::uint64_t b) {
  return detail::mix_in(detail::mix_in(substream(seed, name), a), b);
}

}  // namespace voltwatch::rng
