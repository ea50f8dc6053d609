#pragma once

#include <array>
#include <complex>

#include "mipm/util.hpp"

namespace mipm {

/// Point of the complexified periodic strip: a torus angle paired with a
/// (possibly complex) vertical coordinate. The angle is stored as its
/// canonical representative in [-pi, pi), which also fixes the meaning of
/// |a1| in the anisotropic norm.
struct StripPoint {
  double a1;
  std::complex<double> a2;

  StripPoint(double a1_, std::complex<double> a2_) : a1(wrap_angle(a1_)), a2(a2_) {}
};

/// Anisotropic norm |a|_* = (a1^2 + |a2|^2)^{1/2}.
double star_norm(const StripPoint& a);

/// Green's function of the periodic strip, G(z) = log(cosh z2 - cos z1) / 4pi.
/// Singular at the origin.
double eval_green(double z1, double z2);

/// Biot-Savart kernel K = grad^perp G = (-sinh z2, sin z1)^T / (4pi (cosh z2 - cos z1)).
std::array<double, 2> eval_kernel(double z1, double z2);

/// Vertical component K2 continued to complex a2, together with its first and
/// second complex derivatives in a2 (deriv_order = 0, 1, 2). Requires
/// cosh(a2) != cos(a1).
std::complex<double> eval_k2_complex(const StripPoint& a, int deriv_order);

/// Membership in the cone U^kappa = { |Im a2| < kappa(|a1| + |Re a2|), |Im a2| < pi/2 },
/// kappa in (0, 1/2); both inequalities strict.
bool cone_membership(const StripPoint& a, double kappa);

}  // namespace mipm
