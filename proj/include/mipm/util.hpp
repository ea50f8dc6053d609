#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mipm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Canonical representative of a torus angle in [-pi, pi).
inline double wrap_angle(double a) {
  double w = a - kTwoPi * std::floor((a + kPi) / kTwoPi);
  if (w >= kPi) w -= kTwoPi;  // guards the rounding edge at +pi
  if (w < -kPi) w += kTwoPi;
  return w;
}

// Polynomial cores for the quadrature hot loops: even/odd Taylor sums,
// accurate to ~2e-13 absolute for |x| <= 1.5, falling back to libm beyond.
inline double fast_cosh(double x) {
  double s = x * x;
  if (s <= 2.25) {
    // sum x^{2k}/(2k)!, k = 0..8
    double p = 1.0 / 20922789888000.0;
    p = p * s + 1.0 / 87178291200.0;
    p = p * s + 1.0 / 479001600.0;
    p = p * s + 1.0 / 3628800.0;
    p = p * s + 1.0 / 40320.0;
    p = p * s + 1.0 / 720.0;
    p = p * s + 1.0 / 24.0;
    p = p * s + 0.5;
    p = p * s + 1.0;
    return p;
  }
  return std::cosh(x);
}

inline double fast_sinh(double x) {
  double s = x * x;
  if (s <= 2.25) {
    // x * sum x^{2k}/(2k+1)!, k = 0..7
    double p = 1.0 / 1307674368000.0;
    p = p * s + 1.0 / 6227020800.0;
    p = p * s + 1.0 / 39916800.0;
    p = p * s + 1.0 / 362880.0;
    p = p * s + 1.0 / 5040.0;
    p = p * s + 1.0 / 120.0;
    p = p * s + 1.0 / 6.0;
    p = p * s + 1.0;
    return x * p;
  }
  return std::sinh(x);
}

/// cosh(a) - cos(b) without cancellation: 2(sinh^2(a/2) + sin^2(b/2)).
inline double cosh_minus_cos(double a, double b) {
  double sh = fast_sinh(0.5 * a);
  double sn = std::sin(0.5 * b);
  return 2.0 * (sh * sh + sn * sn);
}

struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct missing_artifact_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Least-squares slope of log(y) against log(x). Requires positive data.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mipm
