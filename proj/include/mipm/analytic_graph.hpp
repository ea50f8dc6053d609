#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mipm/fourier.hpp"

namespace mipm {

/// Real analytic initial interface gamma0, held as a truncated Fourier series
/// together with an estimated half-width rho0 of its strip of analyticity.
/// rho0 is certified by the coefficient bound
///   8 sum_{k != 0} |k c_k| sinh(|k| rho0) < 1,
/// a sufficient condition for 4 sup_{U_rho0} |Im gamma0'| < 1, and capped at 1.
struct AnalyticGraph {
  TrigSeries series;
  double rho0 = 1.0;

  /// Builds from full-spectrum coefficients (k, c_k). Validates conjugate
  /// symmetry c_{-k} = conj(c_k) and estimates rho0.
  static AnalyticGraph from_coeffs(const std::vector<std::pair<int, cd>>& coeffs);
  static AnalyticGraph flat();
  static AnalyticGraph cosine(double amplitude, int wavenumber = 1);

  bool is_flat() const;
};

/// gamma0 and derivatives (d = 0..3) on the complex strip |Im y1| <= rho0.
cd graph_eval(const AnalyticGraph& g, cd y1, int deriv_order = 0);

/// Largest rho0 on a bisection grid with 8 sum |k c_k| sinh(|k| rho0) < 1,
/// capped at 1; the zero series returns the cap.
double estimate_strip_radius(const TrigSeries& s);

/// Text serialization: one "k re im" line per coefficient; exact round trip.
void save_graph(const AnalyticGraph& g, std::ostream& os);
AnalyticGraph load_graph(std::istream& is);
void save_graph_file(const AnalyticGraph& g, const std::string& path);
AnalyticGraph load_graph_file(const std::string& path);

}  // namespace mipm
