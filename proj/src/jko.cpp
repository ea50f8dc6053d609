#include "mipm/jko.hpp"

#include <algorithm>
#include <cmath>

namespace mipm {

double Theta1D::mass() const {
  double acc = 0.0;
  for (double t : theta) acc += t;
  return acc * dy();
}

Theta1D Theta1D::step_data(double L, int cells) {
  Theta1D t;
  t.L = L;
  t.theta.resize(cells);
  double dy = 2.0 * L / cells;
  for (int i = 0; i < cells; ++i) {
    double a = -L + i * dy, b = a + dy;
    if (b <= 0.0)
      t.theta[i] = 1.0;
    else if (a >= 0.0)
      t.theta[i] = 0.0;
    else
      t.theta[i] = -a / dy;
  }
  return t;
}

namespace {

// cumulative mass at cell edges; cum[0] = 0, cum[n] = total
std::vector<double> cumulative(const Theta1D& t) {
  std::vector<double> cum(t.n() + 1, 0.0);
  for (int i = 0; i < t.n(); ++i) cum[i + 1] = cum[i] + std::max(t.theta[i], 0.0) * t.dy();
  return cum;
}

// piecewise-linear quantile of the profile with the given cumulative edges
double quantile(const Theta1D& t, const std::vector<double>& cum, double s) {
  s = std::clamp(s, 0.0, cum.back());
  // first cell with cum[i+1] >= s and positive density
  auto it = std::lower_bound(cum.begin() + 1, cum.end(), s);
  int i = static_cast<int>(it - cum.begin()) - 1;
  while (i < t.n() - 1 && t.theta[i] <= 0.0 && cum[i + 1] <= s) ++i;
  double edge = -t.L + i * t.dy();
  if (t.theta[i] <= 0.0) return edge;
  return edge + (s - cum[i]) / t.theta[i];
}

}  // namespace

double w2_distance_1d(const Theta1D& a, const Theta1D& b) {
  if (a.n() != b.n() || a.L != b.L)
    throw std::invalid_argument("w2_distance_1d: profiles on different grids");
  auto ca = cumulative(a), cb = cumulative(b);
  double m = ca.back();
  if (std::abs(m - cb.back()) > 1e-10)
    throw std::invalid_argument("w2_distance_1d: masses differ");
  if (m == 0.0) return 0.0;
  // merged breakpoints of both quantile functions
  std::vector<double> bp;
  bp.reserve(ca.size() + cb.size());
  for (double s : ca)
    if (s > 0.0 && s < m) bp.push_back(s);
  for (double s : cb)
    if (s > 0.0 && s < m) bp.push_back(s);
  bp.push_back(0.0);
  bp.push_back(m);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  double acc = 0.0;
  for (size_t k = 0; k + 1 < bp.size(); ++k) {
    double s0 = bp[k], s1 = bp[k + 1];
    if (s1 <= s0) continue;
    double sm = 0.5 * (s0 + s1);
    auto d = [&](double s) {
      double q = quantile(a, ca, s) - quantile(b, cb, s);
      return q * q;
    };
    acc += (s1 - s0) / 6.0 * (d(s0) + 4.0 * d(sm) + d(s1));  // exact for quadratics
  }
  return acc;
}

namespace {

Theta1D complement(const Theta1D& t) {
  Theta1D c = t;
  for (double& v : c.theta) v = 1.0 - v;
  return c;
}

// int_{s0}^{s1} Q_ref(s) ds for the piecewise-linear quantile, exact
double quantile_band_integral(const Theta1D& ref, const std::vector<double>& cum, double s0,
                              double s1) {
  double m = cum.back();
  s0 = std::clamp(s0, 0.0, m);
  s1 = std::clamp(s1, 0.0, m);
  if (s1 <= s0) return 0.0;
  int n = ref.n();
  double dy = ref.dy();
  auto it = std::upper_bound(cum.begin(), cum.end(), s0);
  int i = std::max(0, static_cast<int>(it - cum.begin()) - 1);
  double acc = 0.0;
  for (; i < n && cum[i] < s1; ++i) {
    if (ref.theta[i] <= 0.0) continue;
    double a = std::max(s0, cum[i]), b = std::min(s1, cum[i + 1]);
    if (b <= a) continue;
    double edge = -ref.L + i * dy;
    double ra = a - cum[i], rb = b - cum[i];
    acc += (b - a) * edge + (rb * rb - ra * ra) / (2.0 * ref.theta[i]);
  }
  return acc;
}

// Kantorovich potential a(y) = int_{-L}^{y} (u - T(u)) du at cell centers,
// T = Q_ref o C_theta the monotone map pushing theta onto ref; the integrals
// are exact for piecewise-constant densities.
std::vector<double> potential(const Theta1D& theta, const Theta1D& ref) {
  auto cth = cumulative(theta);
  auto cref = cumulative(ref);
  int n = theta.n();
  double dy = theta.dy();
  std::vector<double> a(n);
  double below = 0.0;  // int over all full cells j < i
  for (int i = 0; i < n; ++i) {
    double th = std::max(theta.theta[i], 0.0);
    double yl = -theta.L + i * dy;
    // half cell [edge_i, center_i]
    double half_y = 0.5 * dy * (yl + 0.25 * dy);
    double half_T = (th > 0.0)
                        ? quantile_band_integral(ref, cref, cth[i], cth[i] + 0.5 * th * dy) / th
                        : 0.5 * dy * quantile(ref, cref, cth[i]);
    a[i] = below + half_y - half_T;
    // full cell for the running sum
    double full_y = dy * (yl + 0.5 * dy);
    double full_T = (th > 0.0) ? quantile_band_integral(ref, cref, cth[i], cth[i + 1]) / th
                               : dy * quantile(ref, cref, cth[i]);
    below += full_y - full_T;
  }
  return a;
}

// weighted pool-adjacent-violators: minimize sum w_i (x_i - v_i)^2 over
// nondecreasing x
void pava(std::vector<double>& v, const std::vector<double>& w) {
  int n = static_cast<int>(v.size());
  std::vector<double> val(n), wt(n);
  std::vector<int> cnt(n);
  int m = 0;
  for (int i = 0; i < n; ++i) {
    val[m] = v[i];
    wt[m] = w[i];
    cnt[m] = 1;
    ++m;
    while (m > 1 && val[m - 2] > val[m - 1]) {
      val[m - 2] = (wt[m - 2] * val[m - 2] + wt[m - 1] * val[m - 1]) / (wt[m - 2] + wt[m - 1]);
      wt[m - 2] += wt[m - 1];
      cnt[m - 2] += cnt[m - 1];
      --m;
    }
  }
  int i = 0;
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < cnt[b]; ++c) v[i++] = val[b];
}

// Projection of the cumulative variable onto {0 <= U_{k+1} - U_k <= dy,
// U_0 = 0, U_n = m0}: Dykstra between the two isotonic constraint sets, with
// the endpoints pinned by large weights.
void project_cumulative(std::vector<double>& U, double dy, double m0) {
  int n = static_cast<int>(U.size()) - 1;
  std::vector<double> w(n + 1, 1.0);
  w[0] = w[n] = 1e15;
  std::vector<double> x = U, p(n + 1, 0.0), q(n + 1, 0.0), y(n + 1), t(n + 1);
  x[0] = 0.0;
  x[n] = m0;
  for (int it = 0; it < 100; ++it) {
    for (int k = 0; k <= n; ++k) y[k] = x[k] + p[k];
    pava(y, w);
    for (int k = 0; k <= n; ++k) p[k] = x[k] + p[k] - y[k];
    // slope <= dy: W_k = k dy - U_k nondecreasing (an isometric transform)
    double drift = 0.0;
    for (int k = 0; k <= n; ++k) t[k] = k * dy - (y[k] + q[k]);
    pava(t, w);
    for (int k = 0; k <= n; ++k) {
      double u = k * dy - t[k];
      q[k] = y[k] + q[k] - u;
      drift = std::max(drift, std::abs(u - x[k]));
      x[k] = u;
    }
    if (it > 0 && drift < 1e-14) break;
  }
  // exact feasibility: one forward sweep pinning U_0 = 0, differences in
  // [0, dy], and the lower envelope m0 - (n-k) dy that forces U_n = m0
  x[0] = 0.0;
  for (int k = 1; k <= n; ++k) {
    double lb = std::max(x[k - 1], m0 - (n - k) * dy);
    double ub = x[k - 1] + dy;
    x[k] = std::clamp(x[k], lb, ub);
  }
  U = std::move(x);
}

}  // namespace

namespace {

// (Q_a - Q_b)^2 integrated over a mass band, exact for the piecewise-linear
// quantiles (Simpson per merged-breakpoint segment)
double band_w2_sq(const std::function<double(double)>& qa,
                  const std::function<double(double)>& qb, std::vector<double>& bp, double s0,
                  double s1) {
  bp.push_back(s0);
  bp.push_back(s1);
  std::sort(bp.begin(), bp.end());
  double acc = 0.0;
  for (size_t i = 0; i + 1 < bp.size(); ++i) {
    double a = bp[i], b = bp[i + 1];
    if (b <= a || b < s0 || a > s1) continue;
    a = std::max(a, s0);
    b = std::min(b, s1);
    if (b <= a) continue;
    double m = 0.5 * (a + b);
    auto d2 = [&](double s) {
      double q = qa(s) - qb(s);
      return q * q;
    };
    acc += (b - a) / 6.0 * (d2(a) + 4.0 * d2(m) + d2(b));
  }
  return acc;
}

}  // namespace

std::pair<Theta1D, JkoStepReport> jko_step(const Theta1D& theta_k, double h,
                                           const JkoConfig& cfg) {
  for (double v : theta_k.theta)
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw std::invalid_argument("jko_step: theta_k outside [0, 1]");
  const double m0 = theta_k.mass();
  const int n = theta_k.n();
  const double dy = theta_k.dy();
  Theta1D thc_k = complement(theta_k);

  auto objective = [&](const Theta1D& th) {
    double pot = 0.0;
    for (int i = 0; i < n; ++i) pot += th.theta[i] * th.y(i) * dy;
    return 0.5 * w2_distance_1d(theta_k, th) + 0.5 * w2_distance_1d(thc_k, complement(th)) -
           h * pot;
  };
  auto gradient = [&](const Theta1D& th) {
    std::vector<double> a = potential(th, theta_k);
    std::vector<double> ab = potential(complement(th), thc_k);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = a[i] - ab[i] - h * th.y(i);
    return g;
  };

  // The descent runs on the cumulative variable U_k = sum_{j<k} theta_j dy
  // (endpoints pinned, so mass is exact and a gradient step moves mass only
  // between adjacent cells -- the transport-consistent preconditioning of the
  // cell-value iteration; in plain cell variables the feasibility correction
  // scatters mass at O(1) transport distance and no step size descends).
  auto theta_of = [&](const std::vector<double>& U) {
    Theta1D t = theta_k;
    for (int i = 0; i < n; ++i) t.theta[i] = std::clamp((U[i + 1] - U[i]) / dy, 0.0, 1.0);
    return t;
  };
  auto grad_U = [&](const std::vector<double>& g) {
    std::vector<double> gu(n + 1, 0.0);
    for (int k = 1; k < n; ++k) gu[k] = g[k - 1] - g[k];
    return gu;
  };

  std::vector<double> U(n + 1, 0.0);
  for (int i = 0; i < n; ++i) U[i + 1] = U[i] + theta_k.theta[i] * dy;
  U[n] = m0;

  // Exact 1-D minimization over a single interior edge value U_k with its
  // neighbours fixed: only the mass bands [U_{k-1}, U_{k+1}] (and the mirror
  // band of the complement) contribute, so the local objective is cheap.
  auto cum_ref = cumulative(theta_k);
  auto cum_refc = cumulative(thc_k);
  auto edge_objective = [&](int k, double u) {
    double yl0 = -theta_k.L + (k - 1) * dy, yl1 = yl0 + dy;
    double t0 = (u - U[k - 1]) / dy, t1 = (U[k + 1] - u) / dy;
    auto q_local = [&](double s) {
      if (s <= u) return t0 > 0.0 ? yl0 + (s - U[k - 1]) / t0 : yl0 + dy;
      return t1 > 0.0 ? yl1 + (s - u) / t1 : yl1;
    };
    auto q_ref = [&](double s) { return quantile(theta_k, cum_ref, s); };
    std::vector<double> bp = {u};
    for (double c : cum_ref)
      if (c > U[k - 1] && c < U[k + 1]) bp.push_back(c);
    double w2a = band_w2_sq(q_local, q_ref, bp, U[k - 1], U[k + 1]);

    double B0 = (k - 1) * dy - U[k - 1], B1 = (k + 1) * dy - U[k + 1];
    double ub = k * dy - u;
    double c0 = 1.0 - t0, c1 = 1.0 - t1;
    auto qc_local = [&](double s) {
      if (s <= ub) return c0 > 0.0 ? yl0 + (s - B0) / c0 : yl0 + dy;
      return c1 > 0.0 ? yl1 + (s - ub) / c1 : yl1;
    };
    auto qc_ref = [&](double s) { return quantile(thc_k, cum_refc, s); };
    std::vector<double> bpc = {ub};
    for (double c : cum_refc)
      if (c > B0 && c < B1) bpc.push_back(c);
    double w2b = band_w2_sq(qc_local, qc_ref, bpc, B0, B1);

    double pot = t0 * (yl0 + 0.5 * dy) + t1 * (yl1 + 0.5 * dy);
    return 0.5 * w2a + 0.5 * w2b - h * pot * dy;
  };
  auto cd_sweep = [&]() {
    double total = 0.0;
    for (int k = 1; k < n; ++k) {
      double lo = std::max(U[k - 1], U[k + 1] - dy);
      double hi = std::min(U[k + 1], U[k - 1] + dy);
      if (hi - lo < 1e-15) continue;
      double f_cur = edge_objective(k, U[k]);
      double a = lo, b = hi;
      for (int it = 0; it < 60; ++it) {
        double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (edge_objective(k, m1) <= edge_objective(k, m2))
          b = m2;
        else
          a = m1;
      }
      double best = 0.5 * (a + b);
      double f_best = edge_objective(k, best);
      if (f_best < f_cur) {
        U[k] = best;
        total += f_cur - f_best;
      }
    }
    return total;
  };

  Theta1D th = theta_k;
  double J = objective(th);
  std::vector<double> g = gradient(th);
  std::vector<double> gu = grad_U(g);
  std::vector<double> U_prev, gu_prev;
  double tau = 0.5;
  int iters = 0;
  bool converged = false;

  for (; iters < cfg.max_inner; ++iters) {
    if (!U_prev.empty()) {
      double ss = 0.0, sy = 0.0;
      for (int k = 1; k < n; ++k) {
        double ds = U[k] - U_prev[k];
        double dg = gu[k] - gu_prev[k];
        ss += ds * ds;
        sy += ds * dg;
      }
      if (sy > 1e-300) tau = std::clamp(ss / sy, 1e-8, 1e3);
    }
    U_prev = U;
    gu_prev = gu;

    double Jn = J;
    std::vector<double> trial;
    Theta1D th_trial = th;
    auto try_descend = [&](double tau_start) {
      double t2 = tau_start;
      for (int bt = 0; bt < 60; ++bt) {
        trial = U;
        for (int k = 1; k < n; ++k) trial[k] -= t2 * gu[k];
        project_cumulative(trial, dy, m0);
        th_trial = theta_of(trial);
        Jn = objective(th_trial);
        if (Jn < J) {
          tau = t2;
          return true;
        }
        t2 *= 0.5;
      }
      return false;
    };
    // BB step first, then a fresh moderate step; on a stalled ray fall back
    // to an exact coordinate sweep over the edges (the nonsmooth kinks of the
    // quantile structure can block every gradient ray without being optimal)
    bool moved = try_descend(tau);
    if (!moved && tau != 0.25) moved = try_descend(0.25);
    double decrease;
    if (moved) {
      decrease = J - Jn;
      U = std::move(trial);
      th = th_trial;
      J = Jn;
    } else {
      decrease = cd_sweep();
      th = theta_of(U);
      J = objective(th);
      if (decrease <= 0.0) {
        converged = true;
        break;
      }
    }
    g = gradient(th);
    gu = grad_U(g);
    if (decrease < cfg.obj_tol) {
      converged = true;
      ++iters;
      break;
    }
  }

  JkoStepReport rep;
  rep.h = h;
  rep.objective = J;
  rep.inner_iterations = iters;
  rep.converged = converged;
  rep.a = potential(th, theta_k);
  rep.abar = potential(complement(th), thc_k);
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < n; ++i) {
    if (th.theta[i] > 1e-9 && th.theta[i] < 1.0 - 1e-9) {
      double r = rep.a[i] - rep.abar[i] - h * th.y(i);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  rep.el_residual = (hi >= lo) ? 0.5 * (hi - lo) : 0.0;
  return {th, rep};
}

JkoRun run_jko(const Theta1D& theta0, double h, int n_steps, const JkoConfig& cfg) {
  JkoRun run;
  run.states.push_back(theta0);
  for (int k = 0; k < n_steps; ++k) {
    auto [next, rep] = jko_step(run.states.back(), h, cfg);
    run.states.push_back(std::move(next));
    run.reports.push_back(std::move(rep));
  }
  return run;
}

double burgers_exact(double t, double y) {
  if (t <= 0.0) throw std::domain_error("burgers_exact: requires t > 0");
  return std::clamp(0.5 * (1.0 - y / t), 0.0, 1.0);
}

}  // namespace mipm
