#include "mipm/reconstruction.hpp"

#include <algorithm>
#include <cmath>

namespace mipm {

namespace {
constexpr double kInv4Pi = 1.0 / (4.0 * kPi);
}

std::array<double, 2> flux_m(double rho, const std::array<double, 2>& v, double mu) {
  if (std::abs(rho) > 1.0 + 1e-12)
    throw std::invalid_argument("flux_m: |rho| must be <= 1");
  return {rho * v[0], rho * v[1] - mu * (1.0 - rho * rho)};
}

LevelSetSolution::LevelSetSolution(LevelSetRun run) : run_(std::move(run)) {
  n2_ = run_.config.n2;
  y2_.resize(n2_);
  for (int b = 0; b < n2_; ++b) y2_[b] = -2.0 + 4.0 * b / (n2_ - 1);
  const int n1 = run_.config.n1;
  wrows_.resize(run_.eta.times.size());
  for (size_t i = 0; i < run_.eta.times.size(); ++i) {
    double t = run_.eta.times[i];
    double tp = (t > 0.0) ? std::pow(t, 1.0 + run_.eta.alpha) : 0.0;
    wrows_[i].resize(n2_);
    std::vector<double> row(n1);
    for (int b = 0; b < n2_; ++b) {
      for (int a = 0; a < n1; ++a) row[a] = tp * run_.eta.values[i].at(a, b);
      wrows_[i][b] = analyze(row, n1 / 2 - 1, true);
    }
  }
}

LevelSetSolution::TimeLoc LevelSetSolution::locate_time(double t) const {
  const auto& times = run_.eta.times;
  if (t < 0.0 || t > times.back() * (1.0 + 1e-12))
    throw std::domain_error("LevelSetSolution: time outside solved horizon");
  t = std::min(t, times.back());
  auto it = std::upper_bound(times.begin(), times.end(), t);
  int hi = std::min<int>(static_cast<int>(it - times.begin()), static_cast<int>(times.size()) - 1);
  int lo = hi - 1;
  if (lo < 0) {
    lo = 0;
    hi = 1;
  }
  double th = (t - times[lo]) / (times[hi] - times[lo]);
  return {lo, hi, th};
}

double LevelSetSolution::w_row_eval(int ti, int row, double x1, int deriv) const {
  return wrows_[ti][row].eval(x1, deriv);
}

double LevelSetSolution::w_eval(double t, double x1, double y2, int deriv) const {
  TimeLoc tl = locate_time(t);
  double yc = std::clamp(y2, -2.0, 2.0);
  double h2 = 4.0 / (n2_ - 1);
  int jr = std::min(static_cast<int>((yc + 2.0) / h2), n2_ - 2);
  double ry = (yc + 2.0) / h2 - jr;
  auto val_at = [&](int ti) {
    if (deriv == 2)
      return (w_row_eval(ti, jr + 1, x1, 0) - w_row_eval(ti, jr, x1, 0)) / h2;
    double lo = w_row_eval(ti, jr, x1, deriv);
    double hi = w_row_eval(ti, jr + 1, x1, deriv);
    return lo + ry * (hi - lo);
  };
  double a = val_at(tl.lo), b = val_at(tl.hi);
  return a + tl.th * (b - a);
}

double LevelSetSolution::f(double t, double x1, double y2) const {
  return run_.gamma.series.eval(x1, 0) + t * run_.s0.series.eval(x1, 0) +
         0.5 * w_eval(t, x1, y2, 0);
}

double LevelSetSolution::f_y1(double t, double x1, double y2) const {
  return run_.gamma.series.eval(x1, 1) + t * run_.s0.series.eval(x1, 1) +
         0.5 * w_eval(t, x1, y2, 1);
}

double LevelSetSolution::f_y2(double t, double x1, double y2) const {
  return 0.5 * w_eval(t, x1, y2, 2);
}

double LevelSetSolution::upper_boundary(double t, double x1) const {
  return 2.0 * t + f(t, x1, 2.0);
}

double LevelSetSolution::lower_boundary(double t, double x1) const {
  return -2.0 * t + f(t, x1, -2.0);
}

InvertResult LevelSetSolution::invert_transform(double t, double x1, double x2) const {
  if (t <= 0.0) throw std::domain_error("invert_transform: requires t > 0");
  if (x2 > upper_boundary(t, x1)) return {Region::above, 0.0};
  if (x2 < lower_boundary(t, x1)) return {Region::below, 0.0};
  auto g = [&](double y2) { return t * y2 + f(t, x1, y2) - x2; };
  double lo = -2.0, hi = 2.0;
  double glo = g(lo);
  for (int it = 0; it < 45; ++it) {
    double mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if ((glo <= 0.0) == (gm <= 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    double dg = t + f_y2(t, x1, y);
    if (dg <= 0.0)
      throw std::runtime_error("invert_transform: monotonicity violated");
    y = std::clamp(y - g(y) / dg, -2.0, 2.0);
  }
  return {Region::inside, y};
}

double LevelSetSolution::density_at(double t, double x1, double x2) const {
  InvertResult r = invert_transform(t, x1, x2);
  switch (r.region) {
    case Region::above: return 1.0;
    case Region::below: return -1.0;
    default: return 0.5 * r.y2;
  }
}

namespace {

/// Offsets u = x1 - z1 and weights of the composite z1 rule, flattened.
struct VelRule {
  std::vector<double> off, w;

  VelRule(int nq, int refine_cells, double ratio, double floor_val) {
    CompositeZ1Rule rule = make_z1_rule(nq, refine_cells, ratio, floor_val);
    double dz = kTwoPi / nq;
    for (int c = 0; c < nq; ++c) {
      if (rule.uw[c] == 0.0) continue;
      off.push_back(-kPi + c * dz);
      w.push_back(rule.uw[c]);
    }
    for (size_t m = 0; m < rule.soff.size(); ++m) {
      off.push_back(rule.soff[m]);
      w.push_back(rule.sw[m]);
    }
    off.push_back(0.0);
    w.push_back(rule.zero_w);
  }
};

}  // namespace

std::array<double, 2> LevelSetSolution::velocity_at(double t, double x1, double x2) const {
  if (t <= 0.0) throw std::domain_error("velocity_at: requires t > 0");
  const SolverConfig& c = run_.config;
  VelRule rule_obj(c.quad_z1, c.refine_cells, c.refine_ratio, c.refine_floor);
  const VelRule* rule = &rule_obj;
  TimeLoc tl = locate_time(t);
  double h2 = 4.0 / (n2_ - 1);

  double a0 = 0.0, a1acc = 0.0;
  for (size_t m = 0; m < rule->off.size(); ++m) {
    double u = rule->off[m];
    double z1 = x1 - u;
    double g0 = run_.gamma.series.eval(z1, 0), g0p = run_.gamma.series.eval(z1, 1);
    double s0v = run_.s0.series.eval(z1, 0), s0p = run_.s0.series.eval(z1, 1);
    double su = std::sin(u);
    double s2h = std::sin(0.5 * u);
    s2h *= s2h;
    double rowsum0 = 0.0, rowsum1 = 0.0;
    for (int d = 0; d < n2_; ++d) {
      double wlo = w_row_eval(tl.lo, d, z1, 0), whi = w_row_eval(tl.hi, d, z1, 0);
      double wv = wlo + tl.th * (whi - wlo);
      double plo = w_row_eval(tl.lo, d, z1, 1), phi = w_row_eval(tl.hi, d, z1, 1);
      double pv = plo + tl.th * (phi - plo);
      double X2 = t * y2_[d] + g0 + t * s0v + 0.5 * wv;
      double fp = g0p + t * s0p + 0.5 * pv;
      double a2 = x2 - X2;
      double sh = fast_sinh(0.5 * a2);
      double den = 2.0 * (sh * sh + s2h);
      if (den < 1e-16) continue;  // the singular node z = X_t^{-1}(x), assigned 0
      double wz = (d == 0 || d == n2_ - 1) ? 0.5 * h2 : h2;
      rowsum0 += wz * (-std::sinh(a2)) / den * fp;
      rowsum1 += wz * fp / den;
    }
    a0 += rule->w[m] * rowsum0;
    a1acc += rule->w[m] * su * rowsum1;
  }
  return {0.5 * kInv4Pi * a0, 0.5 * kInv4Pi * a1acc};
}

std::vector<double> LevelSetSolution::level_curve(double t, double h, int nx1) const {
  if (std::abs(h) > 1.0) throw std::invalid_argument("level_curve: h must be in [-1, 1]");
  std::vector<double> out(nx1);
  for (int i = 0; i < nx1; ++i) {
    double x1 = kTwoPi * i / nx1;
    out[i] = 2.0 * h * t + f(t, x1, 2.0 * h);
  }
  return out;
}

double LevelSetSolution::mixing_zone_area(double t, int nx1) const {
  double acc = 0.0;
  for (int i = 0; i < nx1; ++i) {
    double x1 = kTwoPi * i / nx1;
    acc += upper_boundary(t, x1) - lower_boundary(t, x1);
  }
  return acc * kTwoPi / nx1;
}

GridField LevelSetSolution::sample_density(double t, int nx1, int nx2, double L,
                                           bool cell_centered) const {
  GridField out(nx1, nx2, L, t, 1, cell_centered);
  for (int i = 0; i < nx1; ++i) {
    double x1 = out.x1(i);
    for (int j = 0; j < nx2; ++j) out.at(0, i, j) = density_at(t, x1, out.x2(j));
  }
  return out;
}

GridField LevelSetSolution::sample_velocity(double t, int nx1, int nx2, double L,
                                            bool cell_centered) const {
  GridField out(nx1, nx2, L, t, 2, cell_centered);
  const SolverConfig& c = run_.config;
  VelRule rule(c.quad_z1, c.refine_cells, c.refine_ratio, c.refine_floor);
  TimeLoc tl = locate_time(t);
  double h2 = 4.0 / (n2_ - 1);
  size_t nm = rule.off.size();

  // per-column tables: X_{t,2} and d_y1 f at every (offset, row)
  std::vector<double> X2t(nm * n2_), Gt(nm * n2_), sinu(nm), s2h(nm);
  for (int i = 0; i < nx1; ++i) {
    double x1 = out.x1(i);
    for (size_t m = 0; m < nm; ++m) {
      double u = rule.off[m];
      double z1 = x1 - u;
      sinu[m] = std::sin(u);
      double sh = std::sin(0.5 * u);
      s2h[m] = sh * sh;
      double g0 = run_.gamma.series.eval(z1, 0), g0p = run_.gamma.series.eval(z1, 1);
      double s0v = run_.s0.series.eval(z1, 0), s0p = run_.s0.series.eval(z1, 1);
      for (int d = 0; d < n2_; ++d) {
        double wlo = w_row_eval(tl.lo, d, z1, 0), whi = w_row_eval(tl.hi, d, z1, 0);
        double plo = w_row_eval(tl.lo, d, z1, 1), phi = w_row_eval(tl.hi, d, z1, 1);
        X2t[m * n2_ + d] = t * y2_[d] + g0 + t * s0v + 0.5 * (wlo + tl.th * (whi - wlo));
        Gt[m * n2_ + d] = g0p + t * s0p + 0.5 * (plo + tl.th * (phi - plo));
      }
    }
    for (int j = 0; j < nx2; ++j) {
      double x2 = out.x2(j);
      double a0 = 0.0, a1acc = 0.0;
      for (size_t m = 0; m < nm; ++m) {
        double rowsum0 = 0.0, rowsum1 = 0.0;
        for (int d = 0; d < n2_; ++d) {
          double a2 = x2 - X2t[m * n2_ + d];
          double sh = fast_sinh(0.5 * a2);
          double den = 2.0 * (sh * sh + s2h[m]);
          if (den < 1e-16) continue;  // singular node, assigned 0
          double wz = (d == 0 || d == n2_ - 1) ? 0.5 * h2 : h2;
          double fp = Gt[m * n2_ + d];
          rowsum0 += wz * (-fast_sinh(a2)) / den * fp;
          rowsum1 += wz * fp / den;
        }
        a0 += rule.w[m] * rowsum0;
        a1acc += rule.w[m] * sinu[m] * rowsum1;
      }
      out.at(0, i, j) = 0.5 * kInv4Pi * a0;
      out.at(1, i, j) = 0.5 * kInv4Pi * a1acc;
    }
  }
  return out;
}

GridField LevelSetSolution::assemble_flux(const GridField& rho, const GridField& vel, double mu) {
  rho.check_compatible(vel, "assemble_flux");
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("assemble_flux: mu out of (0, 1]");
  GridField m(rho.nx1, rho.nx2, rho.L, rho.time, 2, rho.cell_centered);
  for (int i = 0; i < rho.nx1; ++i)
    for (int j = 0; j < rho.nx2; ++j) {
      auto mm = flux_m(rho.at(0, i, j), {vel.at(0, i, j), vel.at(1, i, j)}, mu);
      m.at(0, i, j) = mm[0];
      m.at(1, i, j) = mm[1];
    }
  return m;
}

}  // namespace mipm
