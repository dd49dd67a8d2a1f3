#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hawkescox/posterior.hpp"
#include "hawkescox/rng.hpp"

namespace hawkescox {

// Blocked MALA schedule: block 1 updates the latent path x, block 2 the
// background parameters (a, sigma2, mu and, when the trend is enabled, c),
// block 3 the self-excitation parameters (b, theta). Step sizes are fixed
// for the whole run; there is no adaptation.
struct McmcConfig {
  std::size_t iters = 500000;   // total sweeps
  std::size_t burnin = 250000;  // sweeps discarded before recording draws
  double eps_x = 0.1;
  double eps_cox = 0.01;
  double eps_hawkes = 0.01;
  double eps_trend = 1e-4;  // step for c; its raw gradient scales like N^2/2
  std::size_t thin_x = 50;  // storage stride for latent paths
  std::uint64_t seed = 1;
  bool trend_enabled = false;
  bool update_x = true;
  bool update_cox = true;
  bool update_hawkes = true;
  std::optional<State> init;  // full override of the default initialization
  PriorSpec prior{};
};

struct ParamDraw {
  std::size_t iter = 0;
  double a = 0, sigma2 = 0, mu = 0, b = 0, theta = 0, c = 0;
  double logpost = 0;
};

struct LatentDraw {
  std::size_t iter = 0;
  std::vector<double> values;
};

struct AcceptRates {
  double x = 0, cox = 0, hawkes = 0;
};

struct ChainSamples {
  std::vector<ParamDraw> param_draws;  // one per post-burn-in sweep
  std::vector<LatentDraw> x_draws;     // thinned
  AcceptRates accept_rates;
  std::vector<double> log_post_trace;  // one per sweep, full run
  McmcConfig config;
  double dt = 1.0;
};

inline void validate(const McmcConfig& config) {
  if (config.iters < 1) throw std::invalid_argument("McmcConfig: iters must be >= 1");
  if (config.burnin >= config.iters)
    throw std::invalid_argument("McmcConfig: burnin must be < iters");
  if (!(config.eps_x > 0 && config.eps_cox > 0 && config.eps_hawkes > 0 &&
        config.eps_trend > 0))
    throw std::invalid_argument("McmcConfig: step sizes must be positive");
  if (config.thin_x < 1) throw std::invalid_argument("McmcConfig: thin_x must be >= 1");
}

struct BlockStep {
  std::vector<double> value;
  bool accepted = false;
  double log_post = kNegInf;  // log posterior at the returned value
};

// One MALA update of a coordinate block:
//   propose v* = v + (eps^2/2) grad(v) + eps Z,
//   accept with probability min{1, q(v|v*) pi(v*) / (q(v*|v) pi(v))}.
// eps is a per-coordinate scale (one shared scalar per block in the default
// schedule; c gets its own). Out-of-support proposals have logpost -inf and
// are rejected. All ratios are formed in log space. cached_lp, when finite,
// is trusted as logpost_fn(current) and skips one evaluation.
template <class GradFn, class LogPostFn>
BlockStep mala_block_step(const std::vector<double>& current, GradFn&& grad_fn,
                          LogPostFn&& logpost_fn, std::span<const double> eps,
                          Rng& rng,
                          double cached_lp = std::numeric_limits<double>::quiet_NaN()) {
  const std::size_t dim = current.size();
  if (eps.size() != dim)
    throw std::invalid_argument("mala_block_step: eps size does not match block size");

  const double lp_cur = std::isnan(cached_lp) ? logpost_fn(current) : cached_lp;
  const std::vector<double> g_cur = grad_fn(current);

  std::vector<double> mean_fwd(dim), proposal(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    mean_fwd[i] = current[i] + 0.5 * eps[i] * eps[i] * g_cur[i];
    proposal[i] = mean_fwd[i] + eps[i] * rng.normal();
  }

  const double lp_prop = logpost_fn(proposal);
  double log_ratio = kNegInf;
  if (std::isfinite(lp_prop)) {
    const std::vector<double> g_prop = grad_fn(proposal);
    double fwd = 0.0, rev = 0.0;  // squared Mahalanobis terms of q
    for (std::size_t i = 0; i < dim; ++i) {
      const double df = (proposal[i] - mean_fwd[i]) / eps[i];
      fwd += df * df;
      const double mean_rev = proposal[i] + 0.5 * eps[i] * eps[i] * g_prop[i];
      const double dr = (current[i] - mean_rev) / eps[i];
      rev += dr * dr;
    }
    log_ratio = lp_prop - lp_cur + 0.5 * (fwd - rev);
  }

  const double u = rng.uniform();
  if (std::log(u) < log_ratio) return {std::move(proposal), true, lp_prop};
  return {current, false, lp_cur};
}

template <class GradFn, class LogPostFn>
BlockStep mala_block_step(const std::vector<double>& current, GradFn&& grad_fn,
                          LogPostFn&& logpost_fn, double eps, Rng& rng) {
  const std::vector<double> eps_vec(current.size(), eps);
  return mala_block_step(current, std::forward<GradFn>(grad_fn),
                         std::forward<LogPostFn>(logpost_fn),
                         std::span<const double>(eps_vec), rng);
}

// Default initialization: flat latent path at mu0 = log(mean(y) + 1e-3),
// mid-range parameters. A full State supplied in the config is returned
// verbatim.
inline State init_state(const CountSeries& y, const McmcConfig& config) {
  validate(y);
  if (config.init) {
    const State& s = *config.init;
    if (s.x.values.size() != y.counts.size())
      throw std::invalid_argument("init_state: supplied state length differs from data");
    return s;
  }
  double mean = 0.0;
  for (int v : y.counts) mean += static_cast<double>(v);
  mean /= static_cast<double>(y.counts.size());
  State s;
  s.params.a = 0.5;
  s.params.sigma2 = 0.5;
  s.params.mu = std::log(mean + 1e-3);
  s.params.b = 0.5;
  s.params.theta = 0.25;
  s.params.c = 0.0;
  s.params.dt = y.dt;
  s.x.values.assign(y.counts.size(), s.params.mu);
  return s;
}

// Run the full blocked chain. Deterministic given config.seed; every sweep
// costs O(N).
inline ChainSamples run_chain(const CountSeries& y, const McmcConfig& config) {
  validate(y);
  validate(config);
  State s = init_state(y, config);
  s.params.dt = y.dt;
  const PriorSpec& prior = config.prior;

  Rng rng(Rng::stream_seed(config.seed, 2));

  // Overflowing proposals count as rejected.
  State scratch = s;
  auto safe_lp = [&](const State& st) {
    try {
      return log_post(st, y, prior);
    } catch (const NumericError&) {
      return kNegInf;
    }
  };

  double current_lp = log_post(s, y, prior);
  if (!std::isfinite(current_lp))
    throw NumericError("run_chain: non-finite log posterior at initialization (mu=" +
                       std::to_string(s.params.mu) + ", sigma2=" +
                       std::to_string(s.params.sigma2) + ")");

  const bool trend = config.trend_enabled;
  std::vector<double> eps_cox(trend ? 4 : 3, config.eps_cox);
  if (trend) eps_cox[3] = config.eps_trend;
  const std::vector<double> eps_x(s.x.values.size(), config.eps_x);
  const std::vector<double> eps_hawkes(2, config.eps_hawkes);

  ChainSamples chain;
  chain.config = config;
  chain.dt = y.dt;
  chain.log_post_trace.reserve(config.iters);
  chain.param_draws.reserve(config.iters - config.burnin);
  std::size_t accept_x = 0, accept_cox = 0, accept_hawkes = 0;

  for (std::size_t iter = 0; iter < config.iters; ++iter) {
    if (config.update_x) {
      auto lp_fn = [&](const std::vector<double>& v) {
        scratch.params = s.params;
        scratch.x.values = v;
        return safe_lp(scratch);
      };
      auto grad_fn = [&](const std::vector<double>& v) {
        scratch.params = s.params;
        scratch.x.values = v;
        return grad_x(scratch, y);
      };
      BlockStep step = mala_block_step(s.x.values, grad_fn, lp_fn,
                                       std::span<const double>(eps_x), rng,
                                       current_lp);
      s.x.values = std::move(step.value);
      accept_x += step.accepted;
      current_lp = step.log_post;
    }

    if (config.update_cox) {
      auto to_state = [&](const std::vector<double>& v) {
        scratch = s;
        scratch.params.a = v[0];
        scratch.params.sigma2 = v[1];
        scratch.params.mu = v[2];
        if (trend) scratch.params.c = v[3];
      };
      auto lp_fn = [&](const std::vector<double>& v) {
        to_state(v);
        return safe_lp(scratch);
      };
      auto grad_fn = [&](const std::vector<double>& v) {
        to_state(v);
        const ParamGrad g = grad_params(scratch, y, prior);
        std::vector<double> out{g.a, g.sigma2, g.mu};
        if (trend) out.push_back(g.c);
        return out;
      };
      std::vector<double> block{s.params.a, s.params.sigma2, s.params.mu};
      if (trend) block.push_back(s.params.c);
      BlockStep step = mala_block_step(block, grad_fn, lp_fn,
                                       std::span<const double>(eps_cox), rng,
                                       current_lp);
      s.params.a = step.value[0];
      s.params.sigma2 = step.value[1];
      s.params.mu = step.value[2];
      if (trend) s.params.c = step.value[3];
      accept_cox += step.accepted;
      current_lp = step.log_post;
    }

    if (config.update_hawkes) {
      auto to_state = [&](const std::vector<double>& v) {
        scratch = s;
        scratch.params.b = v[0];
        scratch.params.theta = v[1];
      };
      auto lp_fn = [&](const std::vector<double>& v) {
        to_state(v);
        return safe_lp(scratch);
      };
      auto grad_fn = [&](const std::vector<double>& v) {
        to_state(v);
        const ParamGrad g = grad_params(scratch, y, prior);
        return std::vector<double>{g.b, g.theta};
      };
      const std::vector<double> block{s.params.b, s.params.theta};
      BlockStep step = mala_block_step(block, grad_fn, lp_fn,
                                       std::span<const double>(eps_hawkes), rng,
                                       current_lp);
      s.params.b = step.value[0];
      s.params.theta = step.value[1];
      accept_hawkes += step.accepted;
      current_lp = step.log_post;
    }

    chain.log_post_trace.push_back(current_lp);
    if (iter >= config.burnin) {
      chain.param_draws.push_back({iter, s.params.a, s.params.sigma2, s.params.mu,
                                   s.params.b, s.params.theta, s.params.c, current_lp});
      if ((iter - config.burnin) % config.thin_x == 0)
        chain.x_draws.push_back({iter, s.x.values});
    }
  }

  const double total = static_cast<double>(config.iters);
  chain.accept_rates.x = static_cast<double>(accept_x) / total;
  chain.accept_rates.cox = static_cast<double>(accept_cox) / total;
  chain.accept_rates.hawkes = static_cast<double>(accept_hawkes) / total;
  return chain;
}

}  // namespace hawkescox
