#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

namespace execsim {

// SplitMix64 finalizer. Full-period mixer, passes the usual batteries when
// driven by a counter.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a stream key from up to four components (seed, stream tag,
// step/episode index, ...). Streams with distinct components are independent.
constexpr std::uint64_t derive_key(std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0, std::uint64_t d = 0) {
  std::uint64_t k = mix64(a);
  k = mix64(k ^ mix64(b + 0x632be59bd9b4e019ULL));
  k = mix64(k ^ mix64(c + 0x9e6c63d0876a9a47ULL));
  k = mix64(k ^ mix64(d + 0xbf2b87f9becc0f9dULL));
  return k;
}

// Counter-based generator: the value stream is a pure function of
// (key, draw index), so replays are independent of evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ ^ mix64(++counter_)); }

  // in [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // in (0, 1]; safe as a log() argument
  double next_open01() { return 1.0 - next_double(); }

  // unbiased-enough uniform in [0, n) via 128-bit multiply-shift
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool coin() { return next_double() < 0.5; }

  // Poisson count by accumulating unit-rate exponential arrivals; O(mean)
  // draws, no underflow for large means.
  std::int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    double acc = 0.0;
    std::int64_t count = -1;
    while (acc <= mean) {
      acc += -std::log(next_open01());
      ++count;
    }
    return count;
  }

  // geometric on {0, 1, 2, ...} with success probability p in (0, 1]
  std::int64_t geometric(double p) {
    if (p >= 1.0) return 0;
    const double u = next_double();  // in [0, 1)
    return static_cast<std::int64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

  // Box-Muller pair; always consumes exactly two uniforms.
  std::pair<double, double> gaussian_pair() {
    const double u1 = next_open01();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  double gaussian() { return gaussian_pair().first; }

  // index into a normalized discrete distribution by CDF inversion
  std::size_t discrete(std::span<const double> probs) {
    const double u = next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace execsim
