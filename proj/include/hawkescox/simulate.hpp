#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "hawkescox/model.hpp"
#include "hawkescox/rng.hpp"

namespace hawkescox {

struct SimConfig {
  ModelParams params;
  std::size_t n = 1;       // number of bins
  std::uint64_t seed = 1;  // run seed; latent and counts use separate substreams
};

struct SimOutput {
  LatentPath x;
  CountSeries y;
  IntensityDecomposition decomp;
};

inline void validate(const SimConfig& config) {
  validate(config.params);
  if (config.n < 1) throw std::invalid_argument("SimConfig: n must be >= 1");
}

// Draw the latent path from its exact stationary AR(1) law:
//   x_1 ~ N(mu, sigma2),  x_i = mu + a*(x_{i-1}-mu) + sqrt(sigma2*(1-a^2))*Z.
// sigma2 == 0 yields the constant path x == mu.
inline LatentPath simulate_latent(const SimConfig& config) {
  validate(config);
  const ModelParams& p = config.params;
  Rng rng(Rng::stream_seed(config.seed, 0));
  LatentPath x;
  x.values.resize(config.n);
  if (p.sigma2 == 0.0) {
    for (auto& v : x.values) v = p.mu;
    return x;
  }
  const double marginal_sd = std::sqrt(p.sigma2);
  const double innov_sd = std::sqrt(p.sigma2 * (1.0 - p.a * p.a));
  x.values[0] = p.mu + marginal_sd * rng.normal();
  for (std::size_t i = 1; i < config.n; ++i)
    x.values[i] = p.mu + p.a * (x.values[i - 1] - p.mu) + innov_sd * rng.normal();
  return x;
}

// Generate counts bin by bin: lambda_i is computed from the history via the
// g recursion, then y_i ~ Poisson(lambda_i). Returns the counts together
// with the realized decomposition (identical to intensity(params, x, y)).
inline std::pair<CountSeries, IntensityDecomposition> simulate_counts(
    const SimConfig& config, const LatentPath& x) {
  validate(config);
  if (x.values.size() != config.n)
    throw std::invalid_argument("simulate_counts: latent path length differs from n");
  const ModelParams& p = config.params;
  Rng rng(Rng::stream_seed(config.seed, 1));

  CountSeries y;
  y.counts.resize(config.n);
  y.dt = p.dt;
  IntensityDecomposition d;
  d.lambda.resize(config.n);
  d.background.resize(config.n);
  d.hawkes.resize(config.n);

  double g = 0.0;
  for (std::size_t i = 0; i < config.n; ++i) {
    if (i > 0) g = p.b * g + p.theta * (1.0 - p.b) * static_cast<double>(y.counts[i - 1]);
    const double bg = checked_exp(x.values[i] + p.c * static_cast<double>(i + 1));
    d.background[i] = bg;
    d.hawkes[i] = g;
    d.lambda[i] = bg + g;
    y.counts[i] = static_cast<int>(rng.poisson(d.lambda[i]));
  }
  return {std::move(y), std::move(d)};
}

inline SimOutput simulate(const SimConfig& config) {
  SimOutput out;
  out.x = simulate_latent(config);
  auto [y, decomp] = simulate_counts(config, out.x);
  out.y = std::move(y);
  out.decomp = std::move(decomp);
  return out;
}

}  // namespace hawkescox
