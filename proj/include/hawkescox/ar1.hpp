#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hawkescox {

// Stationary AR(1) Gaussian prior with covariance S_ij = sigma2 * a^|i-j|.
// The precision matrix is tridiagonal with closed-form entries, so inverse
// application, log-determinant, quadratic form and their parameter
// derivatives all cost O(n) time and memory. For n == 1 the precision is
// [1/sigma2] and |S| = sigma2, consistent with the dense definition.
struct Ar1Spec {
  double a = 0.5;       // lag-one correlation, in (0,1)
  double sigma2 = 1.0;  // marginal variance, > 0
  std::size_t n = 1;    // path length
};

// A latent path with its mean already subtracted.
using CenteredPath = std::vector<double>;

inline void validate(const Ar1Spec& spec) {
  if (!(spec.a > 0.0 && spec.a < 1.0))
    throw std::invalid_argument("Ar1Spec: a must lie in the open interval (0,1)");
  if (!(spec.sigma2 > 0.0) || !std::isfinite(spec.sigma2))
    throw std::invalid_argument("Ar1Spec: sigma2 must be positive and finite");
  if (spec.n < 1) throw std::invalid_argument("Ar1Spec: n must be >= 1");
}

inline void validate_path(const Ar1Spec& spec, std::span<const double> centered) {
  validate(spec);
  if (centered.size() != spec.n)
    throw std::invalid_argument("centered path length does not match Ar1Spec.n");
  for (double v : centered)
    if (!std::isfinite(v))
      throw std::invalid_argument("centered path contains a non-finite entry");
}

// w = S^{-1} x for the tridiagonal precision: prefactor 1/(sigma2(1-a^2)),
// boundary rows (1, -a), interior rows (-a, 1+a^2, -a).
inline std::vector<double> precision_apply(const Ar1Spec& spec,
                                           std::span<const double> centered) {
  validate_path(spec, centered);
  const std::size_t n = spec.n;
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = centered[0] / spec.sigma2;
    return w;
  }
  const double a = spec.a;
  const double pref = 1.0 / (spec.sigma2 * (1.0 - a * a));
  const double diag = 1.0 + a * a;
  w[0] = pref * (centered[0] - a * centered[1]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    w[i] = pref * (-a * centered[i - 1] + diag * centered[i] - a * centered[i + 1]);
  w[n - 1] = pref * (centered[n - 1] - a * centered[n - 2]);
  return w;
}

inline double log_det(const Ar1Spec& spec) {
  validate(spec);
  const double n = static_cast<double>(spec.n);
  return n * std::log(spec.sigma2) + (n - 1.0) * std::log(1.0 - spec.a * spec.a);
}

// x^T S^{-1} x, accumulated in innovations form
//   x_1^2/sigma2 + sum_{i>=2} (x_i - a x_{i-1})^2 / (sigma2 (1-a^2)),
// which is algebraically identical to the tridiagonal quadratic and
// nonnegative term by term.
inline double quad_form(const Ar1Spec& spec, std::span<const double> centered) {
  validate_path(spec, centered);
  const double a = spec.a;
  double innov_sq = 0.0;
  for (std::size_t i = 1; i < spec.n; ++i) {
    const double d = centered[i] - a * centered[i - 1];
    innov_sq += d * d;
  }
  const double head = centered[0] * centered[0] / spec.sigma2;
  if (spec.n == 1) return head;
  return head + innov_sq / (spec.sigma2 * (1.0 - a * a));
}

// Derivative of -0.5*log_det - 0.5*quad_form with respect to a. Prior terms
// on the hyperparameters are added by the posterior module, not here.
inline double d_logprior_da(const Ar1Spec& spec, std::span<const double> centered) {
  validate_path(spec, centered);
  const std::size_t n = spec.n;
  if (n == 1) return 0.0;
  const double a = spec.a;
  const double one_m_a2 = 1.0 - a * a;
  const double pref = 1.0 / (spec.sigma2 * one_m_a2);
  double innov_sq = 0.0;
  double innov_cross = 0.0;  // sum of (x_i - a x_{i-1}) * x_{i-1}
  for (std::size_t i = 1; i < n; ++i) {
    const double d = centered[i] - a * centered[i - 1];
    innov_sq += d * d;
    innov_cross += d * centered[i - 1];
  }
  const double dlogdet = -2.0 * a * (static_cast<double>(n) - 1.0) / one_m_a2;
  const double dquad =
      (2.0 * a / one_m_a2) * (pref * innov_sq) + pref * (-2.0 * innov_cross);
  return -0.5 * dlogdet - 0.5 * dquad;
}

// Derivative of -0.5*log_det - 0.5*quad_form with respect to sigma2.
inline double d_logprior_dsigma2(const Ar1Spec& spec,
                                 std::span<const double> centered) {
  const double q = quad_form(spec, centered);
  return -0.5 * static_cast<double>(spec.n) / spec.sigma2 + 0.5 * q / spec.sigma2;
}

}  // namespace hawkescox
