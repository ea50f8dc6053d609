#include "mipm/diagnostics.hpp"

#include <cmath>

namespace mipm {

double grid_integral(const GridField& f, int comp) {
  double acc = 0.0;
  double dx1 = f.dx1();
  for (int j = 0; j < f.nx2; ++j) {
    double rowsum = 0.0;
    for (int i = 0; i < f.nx1; ++i) rowsum += f.at(comp, i, j);
    acc += rowsum * f.w2(j) * dx1;
  }
  return acc;
}

GridField resample_to(const GridField& src, const GridField& like) {
  if (src.L != like.L)
    throw std::invalid_argument("resample_to: fields cover different strips");
  GridField out(like.nx1, like.nx2, like.L, src.time, src.ncomp, like.cell_centered);
  for (int j = 0; j < like.nx2; ++j) {
    double x2 = like.x2(j);
    double u = (x2 - src.x2(0)) / src.dx2();
    int j0 = std::clamp(static_cast<int>(std::floor(u)), 0, src.nx2 - 2);
    double fy = std::clamp(u - j0, 0.0, 1.0);
    for (int i = 0; i < like.nx1; ++i) {
      double v = like.x1(i) / src.dx1();
      int i0 = static_cast<int>(std::floor(v)) % src.nx1;
      double fx = v - std::floor(v);
      int i1 = (i0 + 1) % src.nx1;
      for (int c = 0; c < src.ncomp; ++c) {
        double lo = src.at(c, i0, j0) + fx * (src.at(c, i1, j0) - src.at(c, i0, j0));
        double hi = src.at(c, i0, j0 + 1) + fx * (src.at(c, i1, j0 + 1) - src.at(c, i0, j0 + 1));
        out.at(c, i, j) = lo + fy * (hi - lo);
      }
    }
  }
  return out;
}

Entropy linear_entropy() {
  return {"s", [](double s) { return s; }, [](double r) { return r * r; }};
}

Entropy quadratic_entropy() {
  return {"s^2", [](double s) { return s * s; }, [](double r) { return 4.0 / 3.0 * r * r * r; }};
}

Entropy kruzhkov_entropy(double c) {
  // Q_c(rho) = int_0^rho 2 sgn(s - c) s ds, piecewise exact
  auto Q = [c](double r) {
    if (c <= std::min(0.0, r)) return r * r;
    if (c >= std::max(0.0, r)) return -r * r;
    if (c >= 0.0) return r * r - 2.0 * c * c;  // 0 <= c <= r
    return 2.0 * c * c - r * r;                // r <= c <= 0
  };
  char buf[32];
  std::snprintf(buf, sizeof buf, "|s-(%g)|", c);
  return {buf, [c](double s) { return std::abs(s - c); }, Q};
}

std::vector<Entropy> default_entropy_suite() {
  return {linear_entropy(), quadratic_entropy(), kruzhkov_entropy(-0.5), kruzhkov_entropy(0.0),
          kruzhkov_entropy(0.3)};
}

double relative_potential_energy(const GridField& rho_t, const Rho0Sampler& rho0,
                                 bool* boundary_warning) {
  if (boundary_warning) {
    *boundary_warning = false;
    for (int i = 0; i < rho_t.nx1; ++i) {
      if (std::abs(rho_t.at(0, i, rho_t.nx2 - 1) - 1.0) > 1e-6 ||
          std::abs(rho_t.at(0, i, 0) + 1.0) > 1e-6)
        *boundary_warning = true;
    }
  }
  double acc = 0.0;
  double dx1 = rho_t.dx1();
  for (int j = 0; j < rho_t.nx2; ++j) {
    double x2 = rho_t.x2(j);
    double rowsum = 0.0;
    for (int i = 0; i < rho_t.nx1; ++i)
      rowsum += (rho_t.at(0, i, j) - rho0(rho_t.x1(i), x2)) * x2;
    acc += rowsum * rho_t.w2(j) * dx1;
  }
  return acc;
}

double mass_error(const GridField& rho_t, const Rho0Sampler& rho0) {
  double acc = 0.0;
  double dx1 = rho_t.dx1();
  for (int j = 0; j < rho_t.nx2; ++j) {
    double x2 = rho_t.x2(j);
    double rowsum = 0.0;
    for (int i = 0; i < rho_t.nx1; ++i) rowsum += rho_t.at(0, i, j) - rho0(rho_t.x1(i), x2);
    acc += rowsum * rho_t.w2(j) * dx1;
  }
  return std::abs(acc);
}

std::pair<std::vector<double>, std::vector<double>> dissipation_identity(
    const std::vector<GridField>& rho_traj, const std::vector<GridField>& flux_traj,
    const Rho0Sampler& rho0) {
  size_t n = rho_traj.size();
  if (n < 3 || flux_traj.size() != n)
    throw std::invalid_argument("dissipation_identity: need >= 3 matching time nodes");
  std::vector<double> E(n), lhs(n), rhs(n);
  for (size_t k = 0; k < n; ++k) {
    E[k] = relative_potential_energy(rho_traj[k], rho0);
    rhs[k] = grid_integral(flux_traj[k], 1);
  }
  auto t = [&](size_t k) { return rho_traj[k].time; };
  lhs[0] = (E[1] - E[0]) / (t(1) - t(0));
  for (size_t k = 1; k + 1 < n; ++k) lhs[k] = (E[k + 1] - E[k - 1]) / (t(k + 1) - t(k - 1));
  lhs[n - 1] = (E[n - 1] - E[n - 2]) / (t(n - 1) - t(n - 2));
  return {lhs, rhs};
}

double entropy_residual_l1(const GridField& rho_minus, const GridField& rho_mid,
                           const GridField& rho_plus, const GridField& vel_mid,
                           const Entropy& entropy, double dt) {
  rho_mid.check_compatible(rho_minus, "entropy_residual");
  rho_mid.check_compatible(rho_plus, "entropy_residual");
  rho_mid.check_compatible(vel_mid, "entropy_residual");
  int nx1 = rho_mid.nx1, nx2 = rho_mid.nx2;
  double dx1 = rho_mid.dx1(), dx2 = rho_mid.dx2();
  double l1 = 0.0;
  for (int j = 1; j + 1 < nx2; ++j) {
    for (int i = 0; i < nx1; ++i) {
      int ip = (i + 1) % nx1, im = (i + nx1 - 1) % nx1;
      double ddt = (entropy.eta(rho_plus.at(0, i, j)) - entropy.eta(rho_minus.at(0, i, j))) /
                   (2.0 * dt);
      double fx1 = (entropy.eta(rho_mid.at(0, ip, j)) * vel_mid.at(0, ip, j) -
                    entropy.eta(rho_mid.at(0, im, j)) * vel_mid.at(0, im, j)) /
                   (2.0 * dx1);
      double fx2 = (entropy.eta(rho_mid.at(0, i, j + 1)) * vel_mid.at(1, i, j + 1) -
                    entropy.eta(rho_mid.at(0, i, j - 1)) * vel_mid.at(1, i, j - 1) +
                    entropy.Q(rho_mid.at(0, i, j + 1)) - entropy.Q(rho_mid.at(0, i, j - 1))) /
                   (2.0 * dx2);
      l1 += std::abs(ddt + fx1 + fx2) * dx1 * dx2;
    }
  }
  return l1;
}

double hull_check(const GridField& rho, const GridField& vel, const GridField& flux) {
  rho.check_compatible(vel, "hull_check");
  rho.check_compatible(flux, "hull_check");
  double worst = -1e300;
  for (int j = 0; j < rho.nx2; ++j)
    for (int i = 0; i < rho.nx1; ++i) {
      double r = rho.at(0, i, j);
      double q1 = 2.0 * (flux.at(0, i, j) - r * vel.at(0, i, j));
      double q2 = 2.0 * (flux.at(1, i, j) - r * vel.at(1, i, j)) + (1.0 - r * r);
      worst = std::max(worst, std::hypot(q1, q2) - (1.0 - r * r));
    }
  return worst;
}

FlatOracle flat_oracle(double t, double x2) {
  if (t <= 0.0) throw std::domain_error("flat_oracle: requires t > 0");
  double rho = std::clamp(x2 / (2.0 * t), -1.0, 1.0);
  return {rho, 0.0, -(1.0 - rho * rho), -8.0 * kPi * t * t / 3.0, -16.0 * kPi * t / 3.0};
}

ExpansionFit expansion_check(const std::vector<LevelCurveSet>& curves,
                             const std::vector<double>& gamma0_x,
                             const std::vector<double>& s0_x) {
  if (curves.size() < 4)
    throw std::invalid_argument("expansion_check: need >= 4 time nodes");
  ExpansionFit fit;
  std::vector<double> ts;
  for (const auto& cs : curves) {
    double rem = 0.0;
    for (size_t ih = 0; ih < cs.h.size(); ++ih)
      for (size_t i = 0; i < cs.x1.size(); ++i) {
        double lin = gamma0_x[i] + cs.time * (2.0 * cs.h[ih] + s0_x[i]);
        rem = std::max(rem, std::abs(cs.vals[ih][i] - lin));
      }
    fit.remainders.push_back(rem);
    ts.push_back(cs.time);
  }
  double top = 0.0;
  for (double r : fit.remainders) top = std::max(top, r);
  if (top == 0.0) {
    fit.exact_zero = true;
    return fit;
  }
  fit.slope = loglog_slope(ts, fit.remainders);
  return fit;
}

std::vector<DiagnosticsRecord> diagnose_trajectory(const std::vector<GridField>& rho,
                                                   const std::vector<GridField>& vel,
                                                   const std::vector<GridField>& flux,
                                                   const Rho0Sampler& rho0,
                                                   const std::vector<Entropy>& entropies) {
  size_t n = rho.size();
  if (n < 3) throw std::invalid_argument("diagnose_trajectory: need >= 3 time nodes");
  auto [lhs, rhs] = dissipation_identity(rho, flux, rho0);
  std::vector<DiagnosticsRecord> out(n);
  for (size_t k = 0; k < n; ++k) {
    DiagnosticsRecord& r = out[k];
    r.time = rho[k].time;
    r.mass_error = mass_error(rho[k], rho0);
    r.e_rel = relative_potential_energy(rho[k], rho0);
    r.dissipation_lhs = lhs[k];
    r.dissipation_rhs = rhs[k];
    r.hull_violation_max = hull_check(rho[k], vel[k], flux[k]);
    if (k > 0 && k + 1 < n) {
      double dt = 0.5 * (rho[k + 1].time - rho[k - 1].time);
      for (const auto& e : entropies)
        r.entropy_residual[e.name] =
            entropy_residual_l1(rho[k - 1], rho[k], rho[k + 1], vel[k], e, dt);
    }
  }
  return out;
}

}  // namespace mipm
