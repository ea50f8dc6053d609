#include "mipm/initial_data.hpp"

#include <cmath>
#include <stdexcept>

#include "mipm/kernel.hpp"
#include "mipm/util.hpp"

namespace mipm {

namespace {

double graph_real(const AnalyticGraph& g, double y1, int d) {
  return g.series.eval(y1, d);
}

// One s0 quadrature pass at resolution n: I(y1) ~ sum_j w K2(.) Delta gamma0'.
double s0_quad_at(const AnalyticGraph& g, double y1, int n) {
  double h = kTwoPi / n;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    double z1 = -kPi + j * h;
    acc += s0_integrand(g, y1, z1);
  }
  return -2.0 * acc * h;
}

}  // namespace

double s0_integrand(const AnalyticGraph& g, double y1, double z1) {
  if (z1 == 0.0) {
    double g1 = graph_real(g, y1, 1);
    double g2 = graph_real(g, y1, 2);
    return g2 / (kTwoPi * (1.0 + g1 * g1));
  }
  double dg = graph_real(g, y1, 0) - graph_real(g, y1 - z1, 0);
  double dgp = graph_real(g, y1, 1) - graph_real(g, y1 - z1, 1);
  double d = cosh_minus_cos(dg, z1);
  return std::sin(z1) / (4.0 * kPi * d) * dgp;
}

NormalVelocity compute_s0(const AnalyticGraph& g, int n_quad, int n_modes) {
  if (n_quad < 16) throw std::invalid_argument("compute_s0: n_quad must be >= 16");
  NormalVelocity out;
  if (g.is_flat()) {
    out.series.c = {cd(0.0)};
    return out;
  }
  int n_eval = 4 * n_modes;  // aliasing control: 4x finer physical grid
  std::vector<double> vals(n_eval), vals2(n_eval);
  for (int i = 0; i < n_eval; ++i) {
    double y1 = kTwoPi * i / n_eval;
    vals[i] = s0_quad_at(g, y1, n_quad);
    vals2[i] = s0_quad_at(g, y1, 2 * n_quad);
  }
  double gap = 0.0;
  for (int i = 0; i < n_eval; ++i) gap = std::max(gap, std::abs(vals[i] - vals2[i]));
  out.series = analyze(vals2, n_modes / 2);
  out.quad_self_convergence = gap;
  return out;
}

InitialVelocity initial_velocity(const AnalyticGraph& g, double x1, double x2,
                                 VelocityMode mode, int n_quad) {
  InitialVelocity out;
  double h = kTwoPi / n_quad;

  if (mode == VelocityMode::off_interface) {
    double gx = graph_real(g, x1, 0);
    if (x2 == gx)
      throw std::domain_error("initial_velocity: off_interface evaluation on the interface");
    if (std::abs(x2 - gx) < h) out.proximity_warning = true;
    double a0 = 0.0, a1 = 0.0;
    for (int j = 0; j < n_quad; ++j) {
      double z1 = -kPi + j * h;
      double gz = graph_real(g, x1 - z1, 0);
      auto k = eval_kernel(z1, x2 - gz);
      double w = 2.0 * graph_real(g, x1 - z1, 1);
      a0 += k[0] * w;
      a1 += k[1] * w;
    }
    out.v = {a0 * h, a1 * h};
    return out;
  }

  // One-sided limit: principal value on nodes symmetric about the singular
  // point z1 = x1 (node omitted), plus the Sokhotski-Plemelj jump.
  double gx = graph_real(g, x1, 0);
  double gpx = graph_real(g, x1, 1);
  double a0 = 0.0, a1 = 0.0;
  for (int j = 0; j < n_quad; ++j) {
    double u = -kPi + j * h;  // u = x1 - z1
    if (u == 0.0) continue;
    double z1v = x1 - u;
    double gz = graph_real(g, z1v, 0);
    auto k = eval_kernel(u, gx - gz);
    double w = 2.0 * graph_real(g, z1v, 1);
    a0 += k[0] * w;
    a1 += k[1] * w;
  }
  double sgn = (mode == VelocityMode::limit_above) ? -1.0 : 1.0;
  double jump = sgn * gpx / (1.0 + gpx * gpx);
  out.v = {a0 * h + jump, a1 * h + jump * gpx};
  return out;
}

}  // namespace mipm
