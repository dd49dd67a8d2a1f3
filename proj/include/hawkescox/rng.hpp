#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace hawkescox {

// Seedable random generator with a pinned algorithm: mt19937_64 for the raw
// stream plus hand-rolled transforms for uniform/normal/Poisson draws, so a
// given seed reproduces the same values on every platform and standard
// library.
//
// Substreams are derived with splitmix64: stream k of a run seeded with s is
// seeded by the (k+1)-th splitmix64 output of s. Streams used by this
// library:
//   0  latent-path simulation
//   1  count simulation
//   2  MCMC sampler
//   1000+j  chain j of a multi-chain run
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Seed of substream `stream` for a run seeded with `seed`.
  static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed;
    std::uint64_t out = 0;
    for (std::uint64_t k = 0; k <= stream; ++k) out = splitmix64(state);
    return out;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0,1); safe as a log() argument.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, caching the second draw of each pair.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.141592653589793238462643383279502884 * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

  // Poisson draw. Product-of-uniforms inversion for small means, Hormann's
  // PTRS transformed rejection for large ones.
  long long poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
  }

 private:
  long long poisson_inversion(double mean) {
    const double limit = std::exp(-mean);
    long long k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= uniform();
    } while (prod > limit);
    return k - 1;
  }

  long long poisson_ptrs(double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long long>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * log_mean - mean - std::lgamma(k + 1.0)) {
        return static_cast<long long>(k);
      }
    }
  }

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace hawkescox
