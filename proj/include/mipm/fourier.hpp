#pragma once

#include <complex>
#include <span>
#include <vector>

namespace mipm {

using cd = std::complex<double>;

/// Real 2pi-periodic trigonometric series stored as a half spectrum:
///   f(x) = c[0] + 2 Re( sum_{k=1}^{kmax} c[k] e^{ikx} ) + nyq * cos((kmax+1) x).
/// The Nyquist cosine term makes analyze/synthesize on a 2(kmax+1)-point grid
/// an exact round trip.
struct TrigSeries {
  std::vector<cd> c;   // k = 0..kmax
  double nyq = 0.0;

  int kmax() const { return static_cast<int>(c.size()) - 1; }

  double eval(double x, int deriv = 0) const;
  cd eval_complex(cd x, int deriv = 0) const;
  bool empty() const { return c.empty(); }
};

/// Projection of n uniform samples (x_j = 2pi j / n) onto modes 0..kmax.
/// With kmax = n/2 - 1 and nyquist = true the projection is invertible.
TrigSeries analyze(std::span<const double> samples, int kmax, bool nyquist = false);

/// Samples of the series on the n-point uniform grid.
std::vector<double> synthesize(const TrigSeries& s, int n, int deriv = 0);

}  // namespace mipm
