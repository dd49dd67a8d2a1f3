#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hawkescox/errors.hpp"

namespace hawkescox {

// Parameters of the discrete-time Hawkes-Cox intensity
//   lambda_i = exp(x_i + c*i) + g_i,
//   g_1 = 0,  g_i = b*g_{i-1} + theta*(1-b)*y_{i-1},
// where x is a stationary AR(1) Gaussian path with mean mu, marginal
// variance sigma2 and lag-one correlation a.
struct ModelParams {
  double a = 0.5;       // AR(1) lag-one correlation, in (0,1)
  double sigma2 = 1.0;  // marginal variance of the latent path, >= 0
  double mu = 0.0;      // latent mean, log-intensity units
  double b = 0.5;       // self-excitation decay factor per bin, in (0,1)
  double theta = 0.0;   // branching ratio (expected offspring per event), in [0,1)
  double c = 0.0;       // per-bin log trend rate; 0 disables the trend
  double dt = 1.0;      // bin width in time units (weeks by default), > 0
};

// Observed event counts per time bin.
struct CountSeries {
  std::vector<int> counts;
  double dt = 1.0;
};

struct LatentPath {
  std::vector<double> values;
};

// lambda = background + hawkes elementwise, with hawkes[0] == 0.
struct IntensityDecomposition {
  std::vector<double> lambda;
  std::vector<double> background;  // exp(x_i + c*i)
  std::vector<double> hawkes;      // g_i
};

struct IntensityParamGrads {
  std::vector<double> dlambda_db;
  std::vector<double> dlambda_dtheta;
};

// Continuous-time rates recovered from the per-bin parameterization.
struct ContinuousParams {
  double omega1 = 0.0;  // mean-reversion rate of the latent process
  double alpha1 = 0.0;  // diffusion coefficient of the latent process
  double omega2 = 0.0;  // decay rate of the triggering kernel
  double alpha2 = 0.0;  // jump size coefficient of the triggering kernel
  double mu = 0.0;
  double timescale_cox = 0.0;     // 1/omega1, in the units of dt
  double timescale_hawkes = 0.0;  // 1/omega2, in the units of dt
};

inline void validate(const ModelParams& p) {
  if (!(p.a > 0.0 && p.a < 1.0))
    throw std::invalid_argument("ModelParams: a must lie in (0,1)");
  if (!(p.sigma2 >= 0.0) || !std::isfinite(p.sigma2))
    throw std::invalid_argument("ModelParams: sigma2 must be >= 0 and finite");
  if (!std::isfinite(p.mu)) throw std::invalid_argument("ModelParams: mu must be finite");
  if (!(p.b > 0.0 && p.b < 1.0))
    throw std::invalid_argument("ModelParams: b must lie in (0,1)");
  if (!(p.theta >= 0.0 && p.theta < 1.0))
    throw std::invalid_argument("ModelParams: theta must lie in [0,1)");
  if (!std::isfinite(p.c)) throw std::invalid_argument("ModelParams: c must be finite");
  if (!(p.dt > 0.0) || !std::isfinite(p.dt))
    throw std::invalid_argument("ModelParams: dt must be positive");
}

inline void validate(const CountSeries& y) {
  if (y.counts.empty()) throw std::invalid_argument("CountSeries: need at least one bin");
  for (int v : y.counts)
    if (v < 0) throw std::invalid_argument("CountSeries: counts must be non-negative");
  if (!(y.dt > 0.0)) throw std::invalid_argument("CountSeries: dt must be positive");
}

inline void validate_lengths(const LatentPath& x, const CountSeries& y) {
  if (x.values.size() != y.counts.size())
    throw std::invalid_argument("latent path and count series lengths differ");
  for (double v : x.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("LatentPath: values must be finite");
}

// exp with an explicit overflow guard; arguments above 700 are reported as
// an error instead of silently producing inf.
inline double checked_exp(double arg) {
  if (arg > 700.0)
    throw NumericError("intensity overflow: exp argument " + std::to_string(arg) +
                       " exceeds 700");
  return std::exp(arg);
}

// Evaluate the intensity and its background/self-excitation split. The
// recursion for g is equivalent to the explicit kernel sum
// theta*((1-b)/b)*b^{i-j}*y_j over j < i and costs O(N).
inline IntensityDecomposition intensity(const ModelParams& p, const LatentPath& x,
                                        const CountSeries& y) {
  validate(p);
  validate(y);
  validate_lengths(x, y);
  const std::size_t n = x.values.size();
  IntensityDecomposition d;
  d.lambda.resize(n);
  d.background.resize(n);
  d.hawkes.resize(n);
  double g = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) g = p.b * g + p.theta * (1.0 - p.b) * static_cast<double>(y.counts[i - 1]);
    const double bg = checked_exp(x.values[i] + p.c * static_cast<double>(i + 1));
    d.background[i] = bg;
    d.hawkes[i] = g;
    d.lambda[i] = bg + g;
  }
  return d;
}

// d lambda_i / db and d lambda_i / dtheta, by differentiating the g
// recursion; both start at 0 and cost O(N).
inline IntensityParamGrads intensity_param_grads(const ModelParams& p,
                                                 const LatentPath& x,
                                                 const CountSeries& y) {
  validate(p);
  validate(y);
  validate_lengths(x, y);
  const std::size_t n = x.values.size();
  IntensityParamGrads out;
  out.dlambda_db.assign(n, 0.0);
  out.dlambda_dtheta.assign(n, 0.0);
  double g = 0.0, dg_db = 0.0, dg_dtheta = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double prev_y = static_cast<double>(y.counts[i - 1]);
    dg_db = g + p.b * dg_db - p.theta * prev_y;
    dg_dtheta = p.b * dg_dtheta + (1.0 - p.b) * prev_y;
    g = p.b * g + p.theta * (1.0 - p.b) * prev_y;
    out.dlambda_db[i] = dg_db;
    out.dlambda_dtheta[i] = dg_dtheta;
  }
  return out;
}

// Invert the discretization map a = 1 - omega1*dt, b = 1 - omega2*dt,
// sigma2 = alpha1^2*dt/(1-a^2), theta*(1-b) = alpha2*omega2.
inline ContinuousParams to_continuous(const ModelParams& p) {
  validate(p);
  ContinuousParams c;
  c.omega1 = (1.0 - p.a) / p.dt;
  c.omega2 = (1.0 - p.b) / p.dt;
  c.alpha1 = std::sqrt(p.sigma2 * (1.0 - p.a * p.a) / p.dt);
  c.alpha2 = p.theta * p.dt;
  c.mu = p.mu;
  c.timescale_cox = 1.0 / c.omega1;
  c.timescale_hawkes = 1.0 / c.omega2;
  return c;
}

// Fraction of observed events attributed to the self-exciting component:
// sum_i y_i * (hawkes_i / lambda_i) / sum_i y_i. Zero when there are no events.
inline double hawkes_fraction(const IntensityDecomposition& d, const CountSeries& y) {
  if (d.lambda.size() != y.counts.size())
    throw std::invalid_argument("hawkes_fraction: decomposition and counts lengths differ");
  double events = 0.0;
  double attributed = 0.0;
  for (std::size_t i = 0; i < y.counts.size(); ++i) {
    const double yi = static_cast<double>(y.counts[i]);
    events += yi;
    if (yi > 0.0) attributed += yi * (d.hawkes[i] / d.lambda[i]);
  }
  if (events == 0.0) return 0.0;
  return attributed / events;
}

}  // namespace hawkescox
