#include "hawkescox/posterior.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hawkescox/rng.hpp"
#include "hawkescox/simulate.hpp"
#include "support/oracles.hpp"

namespace hx = hawkescox;

namespace {

hx::State random_state(hx::Rng& rng, std::size_t n, bool with_trend = false) {
  hx::State s;
  s.params.a = 0.15 + 0.7 * rng.uniform();
  s.params.sigma2 = 0.3 + 2.0 * rng.uniform();
  s.params.mu = -0.5 + 2.5 * rng.uniform();
  s.params.b = 0.15 + 0.7 * rng.uniform();
  s.params.theta = 0.05 + 0.75 * rng.uniform();
  s.params.c = with_trend ? -0.002 + 0.004 * rng.uniform() : 0.0;
  s.x.values.resize(n);
  for (auto& v : s.x.values) v = s.params.mu + 0.8 * rng.normal();
  return s;
}

hx::CountSeries random_counts(hx::Rng& rng, std::size_t n, double mean) {
  hx::CountSeries y;
  y.counts.resize(n);
  for (auto& v : y.counts) v = static_cast<int>(rng.poisson(mean));
  return y;
}

}  // namespace

TEST(Posterior, OutOfSupportIsMinusInfinity) {
  hx::CountSeries y{{1, 2}, 1.0};
  hx::State s;
  s.x.values = {0.0, 0.0};
  s.params.b = 1.2;
  EXPECT_EQ(hx::log_post(s, y), hx::kNegInf);
  s.params.b = 0.5;
  s.params.sigma2 = -0.1;
  EXPECT_EQ(hx::log_post(s, y), hx::kNegInf);
  s.params.sigma2 = 1.0;
  s.params.theta = 1.0;
  EXPECT_EQ(hx::log_post(s, y), hx::kNegInf);
}

TEST(Posterior, LengthMismatchThrows) {
  hx::CountSeries y{{1, 2, 3}, 1.0};
  hx::State s;
  s.x.values = {0.0, 0.0};
  EXPECT_THROW(hx::log_post(s, y), std::invalid_argument);
}

TEST(Posterior, SingleBinClosedFormDifferences) {
  // N=1, y=0: log_post = -e^{x} - (x-mu)^2/(2 sigma2) - 0.5 log sigma2
  //                      + log p(params) + const.
  hx::CountSeries y{{0}, 1.0};
  hx::State s1, s2;
  s1.params.sigma2 = s2.params.sigma2 = 0.8;
  s1.params.mu = s2.params.mu = 0.3;
  s1.x.values = {0.5};
  s2.x.values = {-0.4};
  auto closed = [&](const hx::State& s) {
    return -std::exp(s.x.values[0]) -
           (s.x.values[0] - s.params.mu) * (s.x.values[0] - s.params.mu) /
               (2.0 * s.params.sigma2);
  };
  const double got = hx::log_post(s1, y) - hx::log_post(s2, y);
  EXPECT_NEAR(got, closed(s1) - closed(s2), 1e-12);
}

TEST(Posterior, MatchesDenseOracle) {
  hx::Rng rng(303);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 7);
    hx::State s = random_state(rng, n, true);
    const hx::CountSeries y = random_counts(rng, n, 2.0);
    EXPECT_NEAR(hx::log_post(s, y), oracle::dense_log_post(s, y), 1e-9);
  }
}

TEST(Posterior, GradXTrivialAtFlatPath) {
  const std::size_t n = 6;
  hx::State s;
  s.params.mu = 0.7;
  s.params.c = 0.0;
  s.x.values.assign(n, 0.7);
  hx::CountSeries y{std::vector<int>(n, 0), 1.0};
  const auto g = hx::grad_x(s, y);
  // Centered path is zero, so only v_i = -e^{mu} remains.
  for (double v : g) EXPECT_NEAR(v, -std::exp(0.7), 1e-12);
}

TEST(Posterior, GradientsMatchFiniteDifferences) {
  hx::Rng rng(404);
  const hx::PriorSpec prior;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 10);
    hx::State s = random_state(rng, n, true);
    const hx::CountSeries y = random_counts(rng, n, 3.0);

    const auto gx = hx::grad_x(s, y);
    for (std::size_t i = 0; i < n; ++i) {
      auto f = [&](double v) {
        hx::State t = s;
        t.x.values[i] = v;
        return hx::log_post(t, y, prior);
      };
      EXPECT_LT(oracle::fd_best_err(f, s.x.values[i], gx[i]), 1e-5);
    }

    const auto gp = hx::grad_params(s, y, prior);
    auto check = [&](double value, double analytic, auto setter) {
      auto f = [&](double v) {
        hx::State t = s;
        setter(t.params, v);
        return hx::log_post(t, y, prior);
      };
      EXPECT_LT(oracle::fd_best_err(f, value, analytic), 1e-5);
    };
    check(s.params.a, gp.a, [](hx::ModelParams& p, double v) { p.a = v; });
    check(s.params.sigma2, gp.sigma2, [](hx::ModelParams& p, double v) { p.sigma2 = v; });
    check(s.params.mu, gp.mu, [](hx::ModelParams& p, double v) { p.mu = v; });
    check(s.params.b, gp.b, [](hx::ModelParams& p, double v) { p.b = v; });
    check(s.params.theta, gp.theta, [](hx::ModelParams& p, double v) { p.theta = v; });
    check(s.params.c, gp.c, [](hx::ModelParams& p, double v) { p.c = v; });
  }
}

TEST(Posterior, DecoupledGradientsAtFlatState) {
  // theta=0, y=0, x=mu: db and dtheta carry no likelihood term, dmu reduces
  // to -sum_i e^{mu} plus its prior pull.
  const std::size_t n = 5;
  hx::State s;
  s.params.mu = 0.4;
  s.params.theta = 0.0;
  s.x.values.assign(n, 0.4);
  hx::CountSeries y{std::vector<int>(n, 0), 1.0};
  const hx::PriorSpec prior;
  const auto gp = hx::grad_params(s, y, prior);
  EXPECT_DOUBLE_EQ(gp.b, 0.0);
  // dtheta: d lambda/d theta is the unit kernel sum, all zero when y = 0.
  EXPECT_DOUBLE_EQ(gp.theta, 0.0);
  EXPECT_NEAR(gp.mu, -0.4 / prior.var_mu, 1e-12);  // Gaussian term vanishes at x = mu
}

TEST(Posterior, GradMuDiagonalLimit) {
  // a -> 0+: precision is ~diagonal, so the Gaussian pull on mu is about
  // sum(x - mu)/sigma2, which vanishes for a path centered at mu.
  const std::size_t n = 8;
  hx::State s;
  s.params.a = 1e-8;
  s.params.sigma2 = 1.0;
  s.params.mu = 1.0;
  s.params.theta = 0.0;
  s.x.values = {1.3, 0.7, 1.2, 0.8, 1.1, 0.9, 1.25, 0.75};
  hx::CountSeries y{std::vector<int>(n, 1), 1.0};
  const hx::PriorSpec prior;
  const auto gp = hx::grad_params(s, y, prior);
  // Only the prior term -mu/var remains, up to the vanishing coupling.
  EXPECT_NEAR(gp.mu, -1.0 / prior.var_mu, 1e-6);
}

TEST(Posterior, GradientVanishesAtLatentMode) {
  hx::Rng rng(606);
  hx::SimConfig config;
  config.params = {0.65, 1.0, 1.0, 0.35, 0.4, 0.0, 1.0};
  config.n = 40;
  config.seed = 8;
  const auto sim = hx::simulate(config);

  hx::State s;
  s.params = config.params;
  s.x.values.assign(config.n, config.params.mu);

  // Gradient ascent on x with adaptive step size, then damped Newton with
  // the exact tridiagonal Hessian (diagonal likelihood curvature minus the
  // AR(1) precision) solved by the Thomas algorithm.
  double step = 0.05;
  double lp = hx::log_post(s, sim.y);
  for (int it = 0; it < 2000; ++it) {
    const auto g = hx::grad_x(s, sim.y);
    hx::State trial = s;
    for (std::size_t i = 0; i < g.size(); ++i) trial.x.values[i] += step * g[i];
    const double trial_lp = hx::log_post(trial, sim.y);
    if (trial_lp > lp) {
      s = trial;
      lp = trial_lp;
      step *= 1.1;
    } else {
      step *= 0.5;
    }
    if (step < 1e-12) break;
  }

  const std::size_t n = config.n;
  const double a = s.params.a;
  const double pref = 1.0 / (s.params.sigma2 * (1.0 - a * a));
  auto max_abs_grad = [&](const hx::State& st) {
    double m = 0.0;
    for (double v : hx::grad_x(st, sim.y)) m = std::max(m, std::abs(v));
    return m;
  };
  double err = max_abs_grad(s);
  for (int it = 0; it < 100 && err >= 1e-8; ++it) {
    const auto g = hx::grad_x(s, sim.y);
    const auto d = hx::intensity(s.params, s.x, sim.y);
    std::vector<double> diag(n), off(n > 1 ? n - 1 : 0, -a * pref);
    for (std::size_t i = 0; i < n; ++i) {
      const double bg = d.background[i];
      const double curv =
          static_cast<double>(sim.y.counts[i]) * bg * d.hawkes[i] / (d.lambda[i] * d.lambda[i]) -
          bg;
      const double prec_diag = (i == 0 || i + 1 == n) ? pref : (1.0 + a * a) * pref;
      diag[i] = curv - prec_diag;
    }
    // Thomas solve of H * delta = g.
    std::vector<double> cp(n), dp(n);
    cp[0] = (n > 1 ? off[0] : 0.0) / diag[0];
    dp[0] = g[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = diag[i] - off[i - 1] * cp[i - 1];
      cp[i] = (i + 1 < n ? off[i] : 0.0) / m;
      dp[i] = (g[i] - off[i - 1] * dp[i - 1]) / m;
    }
    std::vector<double> delta(n);
    delta[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) delta[i] = dp[i] - cp[i] * delta[i + 1];

    double damp = 1.0;
    for (int half = 0; half < 40; ++half, damp *= 0.5) {
      hx::State trial = s;
      for (std::size_t i = 0; i < n; ++i) trial.x.values[i] -= damp * delta[i];
      const double trial_err = max_abs_grad(trial);
      if (trial_err < err) {
        s = trial;
        err = trial_err;
        break;
      }
    }
  }
  EXPECT_LT(err, 1e-6);
}
