#include "hawkescox/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace hx = hawkescox;

TEST(Rng, DeterministicAndStreamsIndependent) {
  hx::Rng r1(42), r2(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(r1.next_u64(), r2.next_u64());

  // Distinct substreams of the same seed must differ.
  EXPECT_NE(hx::Rng::stream_seed(42, 0), hx::Rng::stream_seed(42, 1));
  EXPECT_NE(hx::Rng::stream_seed(42, 1), hx::Rng::stream_seed(42, 2));
}

TEST(Rng, UniformStaysInsideOpenInterval) {
  hx::Rng rng(3);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 3.0 / std::sqrt(12.0 * n));
}

TEST(Rng, NormalMoments) {
  hx::Rng rng(5);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(var, 1.0, 3.0 * std::sqrt(2.0 / n));
}

TEST(Rng, PoissonMomentsInBothRegimes) {
  // Means below and above the inversion/PTRS switch at 10.
  for (double mean : {0.5, 3.0, 7.389056098930650, 25.0, 140.0}) {
    hx::Rng rng(17);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      sum += k;
      sumsq += k * k;
    }
    const double m = sum / n;
    const double var = sumsq / n - m * m;
    const double se_mean = std::sqrt(mean / n);
    EXPECT_NEAR(m, mean, 4.0 * se_mean) << "mean=" << mean;
    // Poisson variance equals the mean; SE of the sample variance is
    // roughly sqrt((mean + 2 mean^2)/n).
    EXPECT_NEAR(var, mean, 4.0 * std::sqrt((mean + 2.0 * mean * mean) / n))
        << "mean=" << mean;
  }
}

TEST(Rng, PoissonZeroMeanAndErrors) {
  hx::Rng rng(1);
  EXPECT_EQ(rng.poisson(0.0), 0);
  EXPECT_THROW(rng.poisson(-1.0), std::invalid_argument);
}
