#pragma once

#include <span>

#include "mipm/analytic_graph.hpp"
#include "mipm/grid_field.hpp"

namespace mipm {

struct FVConfig {
  int nx1 = 256, nx2 = 256;  // powers of two in x1 (spectral transform)
  double L = 4.0;
  double cfl = 0.4;          // must be <= 0.45
  double mu = 1.0;           // vertical flux mu * rho^2

  void validate() const;
};

/// Finite-volume state: cell-average density on a uniform grid over
/// T x [-L, L] plus the streamfunction-derived face velocities.
/// rho(i, j): cell centered at (i dx1, -L + (j + 1/2) dx2).
/// v1(i, j):  x1-face at ((i - 1/2) dx1, center j), left face of cell i.
/// v2(i, j):  x2-face at (i dx1, -L + j dx2), j = 0..nx2.
struct FVState {
  int nx1 = 0, nx2 = 0;
  double L = 0.0, time = 0.0;
  std::vector<double> rho;  // nx1 * nx2
  std::vector<double> v1;   // nx1 * nx2
  std::vector<double> v2;   // nx1 * (nx2 + 1)
  std::vector<double> psi;  // corner streamfunction, nx1 * (nx2 + 1)

  double dx1() const { return kTwoPi / nx1; }
  double dx2() const { return 2.0 * L / nx2; }
  double& r(int i, int j) { return rho[static_cast<size_t>(j) * nx1 + i]; }
  double r(int i, int j) const { return rho[static_cast<size_t>(j) * nx1 + i]; }
  double mass() const;

  GridField density_field() const;
  GridField velocity_field() const;      // face averages at cell centers
  GridField flux_field(double mu) const; // m = rho v - mu (1 - rho^2) e2
};

/// Godunov flux for g(rho) = rho^2: min over [rl, rr] of g if rl <= rr,
/// else max over [rr, rl].
double godunov_flux(double rl, double rr);

/// First-order upwinding of the transport flux u * rho.
double upwind_transport_flux(double u, double rl, double rr);

/// Streamfunction solve: Delta psi = -d_x1 rho by FFT in x1 and a tridiagonal
/// solve in x2 with psi = 0 on the boundary corner rows and zero k = 0 mode;
/// v = grad^perp psi on faces, discretely divergence free. Requires constant
/// density along the top/bottom boundary rows.
void spectral_velocity(FVState& s);

struct FVStepStats {
  double dt = 0.0;
  double max_v1 = 0.0, max_v2 = 0.0;
  double entropy_production_max = 0.0;  // over requested Kruzhkov entropies
};

/// One forward-Euler split step: velocity refresh, upwind transport sweep,
/// Godunov sweep for mu * rho^2. dt = cfl * min(dx1/max|v1|, dx2/(max|v2|+2)),
/// optionally capped. Throws on a maximum-principle violation.
void fv_step(FVState& s, const FVConfig& cfg, double dt_cap = -1.0,
             FVStepStats* stats = nullptr, std::span<const double> kruzhkov_c = {});

FVState fv_init(const AnalyticGraph& gamma0, const FVConfig& cfg);

struct FVRun {
  FVConfig config;
  double mass0 = 0.0;
  int steps = 0;
  double max_mass_drift = 0.0;           // |mass - mass0| over the run
  double max_entropy_production = 0.0;   // per cell-step, over c in kruzhkov_c
  double min_rho = 0.0, max_rho = 0.0;
  std::vector<GridField> rho, vel, flux; // at the requested output times
};

/// March to each output time exactly (dt capped at the next output time).
FVRun fv_run(const AnalyticGraph& gamma0, const FVConfig& cfg,
             std::span<const double> out_times,
             std::span<const double> kruzhkov_c = {});

}  // namespace mipm
