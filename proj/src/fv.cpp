#include "mipm/fv.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <map>

namespace mipm {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// cached FFTW plans per transform size
struct FftPlans {
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<double> re;
  std::vector<std::complex<double>> co;

  explicit FftPlans(int n) : re(n), co(n / 2 + 1) {
    fwd = fftw_plan_dft_r2c_1d(n, re.data(), reinterpret_cast<fftw_complex*>(co.data()),
                               FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(co.data()), re.data(),
                               FFTW_ESTIMATE);
  }
};

FftPlans& plans_for(int n) {
  static std::map<int, FftPlans*> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, new FftPlans(n)).first;
  return *it->second;
}

void check_boundary_rows(const FVState& s) {
  for (int i = 1; i < s.nx1; ++i) {
    if (std::abs(s.r(i, 0) - s.r(0, 0)) > 1e-6 ||
        std::abs(s.r(i, s.nx2 - 1) - s.r(0, s.nx2 - 1)) > 1e-6)
      throw std::runtime_error(
          "spectral_velocity: mixing zone reached the top/bottom boundary rows");
  }
}

}  // namespace

void FVConfig::validate() const {
  if (!is_pow2(nx1)) throw validation_error("fv: nx1 must be a power of two");
  if (nx2 < 8) throw validation_error("fv: nx2 must be >= 8");
  if (L <= 0.0) throw validation_error("fv: L must be positive");
  if (!(cfl > 0.0 && cfl <= 0.45))
    throw validation_error("fv: cfl must be in (0, 0.45] (maximum-principle guard)");
  if (!(mu > 0.0 && mu <= 1.0)) throw validation_error("fv: mu must be in (0, 1]");
}

double FVState::mass() const {
  // pairwise-ish accumulation: per-row sums first
  double acc = 0.0;
  for (int j = 0; j < nx2; ++j) {
    double row = 0.0;
    for (int i = 0; i < nx1; ++i) row += r(i, j);
    acc += row;
  }
  return acc * dx1() * dx2();
}

GridField FVState::density_field() const {
  GridField out(nx1, nx2, L, time, 1, true);
  out.v = rho;
  return out;
}

GridField FVState::velocity_field() const {
  GridField out(nx1, nx2, L, time, 2, true);
  for (int j = 0; j < nx2; ++j)
    for (int i = 0; i < nx1; ++i) {
      int ip = (i + 1) % nx1;
      out.at(0, i, j) = 0.5 * (v1[static_cast<size_t>(j) * nx1 + i] +
                               v1[static_cast<size_t>(j) * nx1 + ip]);
      out.at(1, i, j) = 0.5 * (v2[static_cast<size_t>(j) * nx1 + i] +
                               v2[static_cast<size_t>(j + 1) * nx1 + i]);
    }
  return out;
}

GridField FVState::flux_field(double mu) const {
  GridField vel = velocity_field();
  GridField out(nx1, nx2, L, time, 2, true);
  for (int j = 0; j < nx2; ++j)
    for (int i = 0; i < nx1; ++i) {
      double rr = r(i, j);
      out.at(0, i, j) = rr * vel.at(0, i, j);
      out.at(1, i, j) = rr * vel.at(1, i, j) - mu * (1.0 - rr * rr);
    }
  return out;
}

double godunov_flux(double rl, double rr) {
  if (rl <= rr) {
    // min of rho^2 over [rl, rr]
    if (rl >= 0.0) return rl * rl;
    if (rr <= 0.0) return rr * rr;
    return 0.0;  // sonic point
  }
  return std::max(rl * rl, rr * rr);
}

double upwind_transport_flux(double u, double rl, double rr) {
  return u > 0.0 ? u * rl : u * rr;
}

void spectral_velocity(FVState& s) {
  check_boundary_rows(s);
  const int n1 = s.nx1, n2 = s.nx2;
  const int nk = n1 / 2 + 1;
  const double dx1 = s.dx1(), dx2 = s.dx2();
  FftPlans& P = plans_for(n1);

  // rho_hat per cell row
  std::vector<std::complex<double>> rhat(static_cast<size_t>(n2) * nk);
  for (int j = 0; j < n2; ++j) {
    std::memcpy(P.re.data(), s.rho.data() + static_cast<size_t>(j) * n1,
                sizeof(double) * n1);
    fftw_execute(P.fwd);
    for (int k = 0; k < nk; ++k) rhat[static_cast<size_t>(j) * nk + k] = P.co[k] / double(n1);
  }

  // per-mode vertical solve on corner levels (psi = 0 at j = 0 and j = n2)
  std::vector<std::complex<double>> psih(static_cast<size_t>(n2 + 1) * nk, 0.0);
  std::vector<std::complex<double>> rhs(n2 - 1), sol(n2 - 1);
  std::vector<double> diag(n2 - 1), cprime(n2 - 1);
  for (int k = 1; k < nk; ++k) {
    if (k == n1 / 2) continue;  // Nyquist dropped
    double kappa = k;
    // corner x1 offset is -dx1/2 relative to the centers
    std::complex<double> phase = std::exp(std::complex<double>(0.0, -kappa * 0.5 * dx1));
    std::complex<double> ik(0.0, kappa);
    for (int j = 1; j < n2; ++j)
      rhs[j - 1] = -ik * phase * 0.5 *
                   (rhat[static_cast<size_t>(j - 1) * nk + k] + rhat[static_cast<size_t>(j) * nk + k]);
    // Thomas algorithm for (psi_{j-1} - 2 psi_j + psi_{j+1})/dx2^2 - kappa^2 psi_j = rhs_j
    double a = 1.0 / (dx2 * dx2);
    double b = -2.0 / (dx2 * dx2) - kappa * kappa;
    diag[0] = b;
    sol[0] = rhs[0];
    for (int m = 1; m < n2 - 1; ++m) {
      cprime[m - 1] = a / diag[m - 1];
      diag[m] = b - cprime[m - 1] * a;
      sol[m] = rhs[m] - cprime[m - 1] * sol[m - 1];
    }
    sol[n2 - 2] /= diag[n2 - 2];
    for (int m = n2 - 3; m >= 0; --m) sol[m] = (sol[m] - a * sol[m + 1]) / diag[m];
    for (int j = 1; j < n2; ++j) psih[static_cast<size_t>(j) * nk + k] = sol[j - 1];
  }

  // corner streamfunction values
  s.psi.assign(static_cast<size_t>(n1) * (n2 + 1), 0.0);
  for (int j = 1; j < n2; ++j) {
    for (int k = 0; k < nk; ++k) P.co[k] = psih[static_cast<size_t>(j) * nk + k];
    fftw_execute(P.bwd);  // unnormalized c2r of coefficients already divided by n1
    std::memcpy(s.psi.data() + static_cast<size_t>(j) * n1, P.re.data(), sizeof(double) * n1);
  }

  // faces: v = grad^perp psi, discretely divergence free
  s.v1.assign(static_cast<size_t>(n1) * n2, 0.0);
  s.v2.assign(static_cast<size_t>(n1) * (n2 + 1), 0.0);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      s.v1[static_cast<size_t>(j) * n1 + i] =
          -(s.psi[static_cast<size_t>(j + 1) * n1 + i] - s.psi[static_cast<size_t>(j) * n1 + i]) /
          dx2;
  for (int j = 1; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      int ip = (i + 1) % n1;
      s.v2[static_cast<size_t>(j) * n1 + i] =
          (s.psi[static_cast<size_t>(j) * n1 + ip] - s.psi[static_cast<size_t>(j) * n1 + i]) / dx1;
    }
}

namespace {

// Crandall-Majda numerical entropy flux for the Kruzhkov entropy |u - c|
double kruzhkov_godunov_flux(double a, double b, double c) {
  return godunov_flux(std::max(a, c), std::max(b, c)) -
         godunov_flux(std::min(a, c), std::min(b, c));
}

}  // namespace

void fv_step(FVState& s, const FVConfig& cfg, double dt_cap, FVStepStats* stats,
             std::span<const double> kruzhkov_c) {
  const int n1 = s.nx1, n2 = s.nx2;
  const double dx1 = s.dx1(), dx2 = s.dx2();
  spectral_velocity(s);

  double mv1 = 0.0, mv2 = 0.0;
  for (double v : s.v1) mv1 = std::max(mv1, std::abs(v));
  for (double v : s.v2) mv2 = std::max(mv2, std::abs(v));
  double dt = cfg.cfl * std::min(mv1 > 0.0 ? dx1 / mv1 : 1e300, dx2 / (mv2 + 2.0));
  if (dt_cap > 0.0) dt = std::min(dt, dt_cap);
  if (stats) {
    stats->dt = dt;
    stats->max_v1 = mv1;
    stats->max_v2 = mv2;
    stats->entropy_production_max = 0.0;
  }

  // transport sweep (upwind, divergence-free face velocities)
  std::vector<double> f1(static_cast<size_t>(n1) * n2), f2(static_cast<size_t>(n1) * (n2 + 1), 0.0);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      int im = (i + n1 - 1) % n1;
      f1[static_cast<size_t>(j) * n1 + i] =
          upwind_transport_flux(s.v1[static_cast<size_t>(j) * n1 + i], s.r(im, j), s.r(i, j));
    }
  for (int j = 1; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      f2[static_cast<size_t>(j) * n1 + i] =
          upwind_transport_flux(s.v2[static_cast<size_t>(j) * n1 + i], s.r(i, j - 1), s.r(i, j));

  std::vector<double> mid(static_cast<size_t>(n1) * n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      int ip = (i + 1) % n1;
      double div = (f1[static_cast<size_t>(j) * n1 + ip] - f1[static_cast<size_t>(j) * n1 + i]) / dx1 +
                   (f2[static_cast<size_t>(j + 1) * n1 + i] - f2[static_cast<size_t>(j) * n1 + i]) / dx2;
      mid[static_cast<size_t>(j) * n1 + i] = s.r(i, j) - dt * div;
    }

  // transport-sweep entropy production (upwinded eta-fluxes)
  if (stats && !kruzhkov_c.empty()) {
    for (double c : kruzhkov_c) {
      auto eta = [c](double u) { return std::abs(u - c); };
      for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
          int im = (i + n1 - 1) % n1, ip = (i + 1) % n1;
          auto h1 = [&](int iface, int jrow) {
            double u = s.v1[static_cast<size_t>(jrow) * n1 + iface];
            int il = (iface + n1 - 1) % n1;
            return u > 0.0 ? u * eta(s.r(il, jrow)) : u * eta(s.r(iface, jrow));
          };
          auto h2 = [&](int icol, int jface) {
            if (jface == 0 || jface == n2) return 0.0;
            double u = s.v2[static_cast<size_t>(jface) * n1 + icol];
            return u > 0.0 ? u * eta(s.r(icol, jface - 1)) : u * eta(s.r(icol, jface));
          };
          (void)im;
          double div = (h1(ip, j) - h1(i, j)) / dx1 + (h2(i, j + 1) - h2(i, j)) / dx2;
          double prod = eta(mid[static_cast<size_t>(j) * n1 + i]) - eta(s.r(i, j)) + dt * div;
          stats->entropy_production_max = std::max(stats->entropy_production_max, prod);
        }
    }
  }

  // Godunov sweep for the vertical flux mu * rho^2; boundary rows extend
  // into the ghosts (they are pure phases whenever the guard band holds)
  auto mval = [&](int i, int j) -> double {
    j = std::clamp(j, 0, n2 - 1);
    return mid[static_cast<size_t>(j) * n1 + i];
  };
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      double gl = godunov_flux(mval(i, j - 1), mval(i, j));
      double gu = godunov_flux(mval(i, j), mval(i, j + 1));
      double next = mval(i, j) - dt * cfg.mu * (gu - gl) / dx2;
      if (stats && !kruzhkov_c.empty()) {
        for (double c : kruzhkov_c) {
          double hl = kruzhkov_godunov_flux(mval(i, j - 1), mval(i, j), c);
          double hu = kruzhkov_godunov_flux(mval(i, j), mval(i, j + 1), c);
          double prod = std::abs(next - c) - std::abs(mval(i, j) - c) +
                        dt * cfg.mu * (hu - hl) / dx2;
          stats->entropy_production_max = std::max(stats->entropy_production_max, prod);
        }
      }
      s.r(i, j) = next;
    }

  for (double v : s.rho)
    if (std::abs(v) > 1.0 + 1e-12)
      throw std::runtime_error("fv_step: maximum principle violated (CFL too large)");
  s.time += dt;
}

FVState fv_init(const AnalyticGraph& gamma0, const FVConfig& cfg) {
  cfg.validate();
  FVState s;
  s.nx1 = cfg.nx1;
  s.nx2 = cfg.nx2;
  s.L = cfg.L;
  s.time = 0.0;
  s.rho.assign(static_cast<size_t>(cfg.nx1) * cfg.nx2, 0.0);
  double dx2 = s.dx2();
  for (int i = 0; i < cfg.nx1; ++i) {
    double g = gamma0.series.eval(kTwoPi * i / cfg.nx1, 0);
    for (int j = 0; j < cfg.nx2; ++j) {
      double a = -cfg.L + j * dx2, b = a + dx2;
      double val;
      if (a >= g)
        val = 1.0;
      else if (b <= g)
        val = -1.0;
      else
        val = ((b - g) - (g - a)) / dx2;  // exact cell average of sign(x2 - g)
      s.r(i, j) = val;
    }
  }
  return s;
}

FVRun fv_run(const AnalyticGraph& gamma0, const FVConfig& cfg,
             std::span<const double> out_times, std::span<const double> kruzhkov_c) {
  FVState s = fv_init(gamma0, cfg);
  FVRun run;
  run.config = cfg;
  run.mass0 = s.mass();
  run.min_rho = 1.0;
  run.max_rho = -1.0;

  auto guard_band = [&]() {
    for (int j : {0, 1, 2, 3, s.nx2 - 4, s.nx2 - 3, s.nx2 - 2, s.nx2 - 1})
      for (int i = 0; i < s.nx1; ++i)
        if (std::abs(s.r(i, j)) < 1.0 - 1e-6)
          throw std::runtime_error("fv_run: mixing zone within 4 cells of the boundary");
  };

  auto snapshot = [&]() {
    spectral_velocity(s);  // faces consistent with the current density
    run.rho.push_back(s.density_field());
    run.vel.push_back(s.velocity_field());
    run.flux.push_back(s.flux_field(cfg.mu));
  };

  guard_band();
  FVStepStats st;
  for (double tout : out_times) {
    if (tout < s.time) throw std::invalid_argument("fv_run: output times must increase");
    if (tout == 0.0) {
      snapshot();
      continue;
    }
    while (s.time < tout * (1.0 - 1e-14)) {
      fv_step(s, cfg, tout - s.time, &st, kruzhkov_c);
      ++run.steps;
      run.max_entropy_production = std::max(run.max_entropy_production, st.entropy_production_max);
      run.max_mass_drift = std::max(run.max_mass_drift, std::abs(s.mass() - run.mass0));
      for (double v : s.rho) {
        run.min_rho = std::min(run.min_rho, v);
        run.max_rho = std::max(run.max_rho, v);
      }
      guard_band();
    }
    snapshot();
  }
  return run;
}

}  // namespace mipm
