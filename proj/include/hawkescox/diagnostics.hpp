#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "hawkescox/errors.hpp"
#include "hawkescox/mala.hpp"
#include "hawkescox/model.hpp"
#include "hawkescox/rng.hpp"

namespace hawkescox {

struct ParamStats {
  double mean = 0.0;
  double sd = 0.0;
  double ess = 0.0;  // effective sample size (batch-means estimate)
};

// Per-bin posterior mean and central interval of an intensity component.
struct Band {
  std::vector<double> mean;
  std::vector<double> lo;  // 2.5% quantile
  std::vector<double> hi;  // 97.5% quantile
};

struct FitSummary {
  ParamStats a, sigma2, mu, b, theta, c;
  bool trend = false;
  ParamStats hawkes_pct;  // percent of events attributed to self-excitation
  // Timescales 1/omega at the posterior-mean parameters (Table-style), and
  // the posterior mean of the per-draw timescales; both in units of dt.
  double timescale_cox = 0.0;
  double timescale_hawkes = 0.0;
  double timescale_cox_draw_mean = 0.0;
  double timescale_hawkes_draw_mean = 0.0;
  AcceptRates accept_rates;
  Band lambda_band, background_band, hawkes_band;
  double dt = 1.0;
  McmcConfig config;
};

struct ResidualReport {
  std::vector<double> tau;     // rescaled event times, strictly increasing
  std::vector<double> excess;  // N(tau_k) - tau_k at each event
  double ks_band = 0.0;        // 1.36 * sqrt(n), the 95% KS envelope
  double ks_stat = 0.0;        // sup deviation of the end-normalized path
  bool within_band = true;
};

struct InterEventHist {
  double bin_width = 1.0;
  std::vector<double> lag_lo;    // left edge of each lag bin, time units
  std::vector<double> observed;  // pair counts per lag bin
  std::vector<double> baseline;  // expectation under uniform event placement
  long long total_pairs = 0;
};

// Linear-interpolation quantile (type 7) of an unsorted sample.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace detail {

inline ParamStats moments(const std::vector<double>& draws) {
  ParamStats s;
  if (draws.empty()) return s;
  const auto m = static_cast<double>(draws.size());
  for (double v : draws) s.mean += v;
  s.mean /= m;
  if (draws.size() > 1) {
    double ss = 0.0;
    for (double v : draws) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (m - 1.0));
  }

  // Batch-means ESS: tau ~ L * Var(batch means) / Var(draws), ESS = M / tau.
  // Reported for inspection only; nothing gates on it.
  s.ess = m;
  const std::size_t n_batches = std::min<std::size_t>(50, draws.size() / 4);
  if (n_batches >= 2 && s.sd > 0.0) {
    const std::size_t len = draws.size() / n_batches;
    double bm_mean = 0.0;
    std::vector<double> bm(n_batches, 0.0);
    for (std::size_t b = 0; b < n_batches; ++b) {
      for (std::size_t i = b * len; i < (b + 1) * len; ++i) bm[b] += draws[i];
      bm[b] /= static_cast<double>(len);
      bm_mean += bm[b];
    }
    bm_mean /= static_cast<double>(n_batches);
    double bm_var = 0.0;
    for (double v : bm) bm_var += (v - bm_mean) * (v - bm_mean);
    bm_var /= static_cast<double>(n_batches - 1);
    if (bm_var > 0.0) {
      const double tau = static_cast<double>(len) * bm_var / (s.sd * s.sd);
      s.ess = std::min(m, m / std::max(1.0, tau));
    }
  }
  return s;
}

inline Band band_from_draws(const std::vector<std::vector<double>>& per_draw,
                            std::size_t n_bins, double q_lo, double q_hi) {
  Band band;
  band.mean.resize(n_bins);
  band.lo.resize(n_bins);
  band.hi.resize(n_bins);
  std::vector<double> column(per_draw.size());
  for (std::size_t i = 0; i < n_bins; ++i) {
    double sum = 0.0;
    for (std::size_t m = 0; m < per_draw.size(); ++m) {
      column[m] = per_draw[m][i];
      sum += column[m];
    }
    band.mean[i] = sum / static_cast<double>(per_draw.size());
    band.lo[i] = quantile(column, q_lo);
    band.hi[i] = quantile(column, q_hi);
  }
  return band;
}

}  // namespace detail

// Posterior summaries from a finished chain: parameter moments over all
// post-burn-in draws; intensity bands, % Hawkes attribution and timescales
// over the stored (x, params) draws.
inline FitSummary summarize(const ChainSamples& chain, const CountSeries& y) {
  if (chain.param_draws.empty())
    throw std::invalid_argument("summarize: chain holds no parameter draws");
  if (chain.x_draws.empty())
    throw std::invalid_argument("summarize: chain holds no latent draws");
  validate(y);
  const std::size_t n_bins = y.counts.size();

  FitSummary out;
  out.trend = chain.config.trend_enabled;
  out.dt = chain.dt;
  out.config = chain.config;
  out.accept_rates = chain.accept_rates;

  const std::size_t m = chain.param_draws.size();
  std::vector<double> buf(m);
  auto stats_of = [&](auto field) {
    for (std::size_t i = 0; i < m; ++i) buf[i] = chain.param_draws[i].*field;
    return detail::moments(buf);
  };
  out.a = stats_of(&ParamDraw::a);
  out.sigma2 = stats_of(&ParamDraw::sigma2);
  out.mu = stats_of(&ParamDraw::mu);
  out.b = stats_of(&ParamDraw::b);
  out.theta = stats_of(&ParamDraw::theta);
  out.c = stats_of(&ParamDraw::c);

  // Intensity decomposition per stored draw, paired with the parameters of
  // the same sweep.
  const std::size_t n_draws = chain.x_draws.size();
  std::vector<std::vector<double>> lambda(n_draws), background(n_draws), hawkes(n_draws);
  std::vector<double> pct(n_draws), ts_cox(m), ts_hawkes(m);
  for (std::size_t i = 0; i < m; ++i) {
    ts_cox[i] = chain.dt / (1.0 - chain.param_draws[i].a);
    ts_hawkes[i] = chain.dt / (1.0 - chain.param_draws[i].b);
  }
  for (std::size_t k = 0; k < n_draws; ++k) {
    const LatentDraw& draw = chain.x_draws[k];
    if (draw.iter < chain.config.burnin ||
        draw.iter - chain.config.burnin >= m)
      throw std::invalid_argument("summarize: latent draw iteration outside chain range");
    const ParamDraw& row = chain.param_draws[draw.iter - chain.config.burnin];
    ModelParams p{row.a, row.sigma2, row.mu, row.b, row.theta, row.c, chain.dt};
    LatentPath x{draw.values};
    const IntensityDecomposition d = intensity(p, x, y);
    pct[k] = 100.0 * hawkes_fraction(d, y);
    lambda[k] = d.lambda;
    background[k] = d.background;
    hawkes[k] = d.hawkes;
  }
  out.hawkes_pct = detail::moments(pct);

  ModelParams at_mean{out.a.mean, out.sigma2.mean, out.mu.mean,
                      out.b.mean, out.theta.mean, out.c.mean, chain.dt};
  const ContinuousParams cont = to_continuous(at_mean);
  out.timescale_cox = cont.timescale_cox;
  out.timescale_hawkes = cont.timescale_hawkes;
  out.timescale_cox_draw_mean = detail::moments(ts_cox).mean;
  out.timescale_hawkes_draw_mean = detail::moments(ts_hawkes).mean;

  out.lambda_band = detail::band_from_draws(lambda, n_bins, 0.025, 0.975);
  out.background_band = detail::band_from_draws(background, n_bins, 0.025, 0.975);
  out.hawkes_band = detail::band_from_draws(hawkes, n_bins, 0.025, 0.975);
  return out;
}

// Time-rescaling residuals. Cumulative boundaries T_i = sum_{j<=i} lambda_j;
// the y_i events of bin i get rescaled times T_{i-1} + k/(y_i+1)*lambda_i
// (deterministic even spreading; pass an Rng for randomized placement). The
// band test uses the end-normalized statistic
//   sup_k max(|k - n*tau_k/T_N|, |k-1 - n*tau_k/T_N|) <= 1.36*sqrt(n),
// matching the normalized cumulative-distribution form of the KS test; the
// raw curve N(tau)-tau is reported for plotting.
inline ResidualReport residuals(const std::vector<double>& lambda,
                                const CountSeries& y, Rng* spread_rng = nullptr) {
  validate(y);
  if (lambda.size() != y.counts.size())
    throw std::invalid_argument("residuals: lambda and counts lengths differ");
  for (double v : lambda)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("residuals: lambda must be strictly positive");

  ResidualReport rep;
  double cum = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const int yi = y.counts[i];
    if (yi > 0) {
      std::vector<double> offsets(static_cast<std::size_t>(yi));
      for (int k = 0; k < yi; ++k)
        offsets[static_cast<std::size_t>(k)] =
            spread_rng ? spread_rng->uniform()
                       : static_cast<double>(k + 1) / static_cast<double>(yi + 1);
      std::sort(offsets.begin(), offsets.end());
      for (double frac : offsets) rep.tau.push_back(cum + frac * lambda[i]);
    }
    cum += lambda[i];
  }

  const std::size_t n = rep.tau.size();
  rep.ks_band = 1.36 * std::sqrt(static_cast<double>(n));
  rep.excess.resize(n);
  const double scale = n > 0 ? static_cast<double>(n) / cum : 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double rank = static_cast<double>(k + 1);
    rep.excess[k] = rank - rep.tau[k];
    const double scaled = scale * rep.tau[k];
    rep.ks_stat = std::max(rep.ks_stat,
                           std::max(std::abs(rank - scaled), std::abs(rank - 1.0 - scaled)));
  }
  rep.within_band = rep.ks_stat <= rep.ks_band;
  return rep;
}

// Histogram of all pairwise inter-event times. Counts are expanded to event
// times at bin centers, so events sharing a bin contribute gap 0 and the
// gap between bins i > j is (i-j)*dt. The baseline column is the expected
// histogram when the same number of events is placed uniformly at random
// over the bins (a linearly decreasing wedge).
inline InterEventHist interevent_hist(const CountSeries& y, double bin_width) {
  validate(y);
  if (!(bin_width > 0.0))
    throw std::invalid_argument("interevent_hist: bin_width must be positive");
  long long n_events = 0;
  for (int v : y.counts) n_events += v;
  if (n_events < 2)
    throw DataError("interevent_hist: need at least 2 events, got " +
                    std::to_string(n_events));

  const std::size_t n_bins = y.counts.size();
  const double dt = y.dt;
  const double max_gap = static_cast<double>(n_bins - 1) * dt;
  const std::size_t n_hist = static_cast<std::size_t>(max_gap / bin_width) + 1;

  InterEventHist hist;
  hist.bin_width = bin_width;
  hist.lag_lo.resize(n_hist);
  hist.observed.assign(n_hist, 0.0);
  hist.baseline.assign(n_hist, 0.0);
  for (std::size_t k = 0; k < n_hist; ++k)
    hist.lag_lo[k] = static_cast<double>(k) * bin_width;

  const double n_pairs = 0.5 * static_cast<double>(n_events) *
                         (static_cast<double>(n_events) - 1.0);
  hist.total_pairs = static_cast<long long>(n_pairs + 0.5);
  const double nb = static_cast<double>(n_bins);

  for (std::size_t lag = 0; lag < n_bins; ++lag) {
    double pairs;
    double prob;  // chance that two independent uniform bins differ by lag
    if (lag == 0) {
      pairs = 0.0;
      for (int v : y.counts)
        pairs += 0.5 * static_cast<double>(v) * (static_cast<double>(v) - 1.0);
      prob = 1.0 / nb;
    } else {
      pairs = 0.0;
      for (std::size_t i = lag; i < n_bins; ++i)
        pairs += static_cast<double>(y.counts[i]) *
                 static_cast<double>(y.counts[i - lag]);
      prob = 2.0 * (nb - static_cast<double>(lag)) / (nb * nb);
    }
    const auto idx = static_cast<std::size_t>(static_cast<double>(lag) * dt / bin_width);
    hist.observed[idx] += pairs;
    hist.baseline[idx] += n_pairs * prob;
  }
  return hist;
}

}  // namespace hawkescox
