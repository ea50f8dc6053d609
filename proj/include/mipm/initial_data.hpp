#pragma once

#include <array>

#include "mipm/analytic_graph.hpp"

namespace mipm {

/// Normal velocity of the interface at t = 0, as a Fourier series on T.
struct NormalVelocity {
  TrigSeries series;
  /// sup-norm gap between the n_quad and 2 n_quad quadratures (resolution check).
  double quad_self_convergence = 0.0;
};

/// s0(y1) = -2 int_T K2(z1, gamma0(y1) - gamma0(y1 - z1)) (gamma0'(y1) - gamma0'(y1 - z1)) dz1.
/// Trapezoidal rule on n_quad uniform nodes; the z1 = 0 node takes the analytic
/// limit gamma0''(y1) / (2 pi (1 + gamma0'(y1)^2)) of the integrand. Coefficients
/// are projected from a physical grid 4x finer than the requested mode count.
NormalVelocity compute_s0(const AnalyticGraph& g, int n_quad, int n_modes = 64);

/// Pointwise integrand of the s0 quadrature (shared with tests).
double s0_integrand(const AnalyticGraph& g, double y1, double z1);

enum class VelocityMode { off_interface, limit_above, limit_below };

struct InitialVelocity {
  std::array<double, 2> v{0.0, 0.0};
  /// Set in off_interface mode when the evaluation point is so close to the
  /// interface that the quadrature degrades (distance below ~ 2pi/n_quad).
  bool proximity_warning = false;
};

/// Vortex-sheet initial velocity. Off the interface this is the plain layer
/// integral; at the interface the one-sided limits combine a principal value
/// (symmetric-node trapezoid, singular node omitted) with the explicit jump
/// -+ gamma0'/(1 + gamma0'^2) (1, gamma0')^T.
InitialVelocity initial_velocity(const AnalyticGraph& g, double x1, double x2,
                                 VelocityMode mode, int n_quad = 2048);

}  // namespace mipm
