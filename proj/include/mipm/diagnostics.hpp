#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mipm/grid_field.hpp"

namespace mipm {

using Rho0Sampler = std::function<double(double, double)>;  // (x1, x2) -> rho0

/// Convex entropy with its induced vertical flux Q(rho) = int_0^rho 2 eta'(s) s ds.
struct Entropy {
  std::string name;
  std::function<double(double)> eta;
  std::function<double(double)> Q;
};

Entropy linear_entropy();                 // eta(s) = s,   Q = rho^2 (the equation itself)
Entropy quadratic_entropy();              // eta(s) = s^2, Q = (4/3) rho^3
Entropy kruzhkov_entropy(double c);       // eta(s) = |s - c|
std::vector<Entropy> default_entropy_suite();  // {s, s^2, |s-c|: c in {-0.5, 0, 0.3}}

struct DiagnosticsRecord {
  double time = 0.0;
  double mass_error = 0.0;
  double e_rel = 0.0;
  double dissipation_lhs = 0.0;
  double dissipation_rhs = 0.0;
  std::map<std::string, double> entropy_residual;
  double hull_violation_max = 0.0;
};

/// E_rel(t) = int (rho(t,x) - rho0(x)) x2 dx, tensor trapezoid / cell sums.
/// Sets *boundary_warning when |rho -+ 1| > 1e-6 on the top/bottom rows.
double relative_potential_energy(const GridField& rho_t, const Rho0Sampler& rho0,
                                 bool* boundary_warning = nullptr);

double mass_error(const GridField& rho_t, const Rho0Sampler& rho0);

/// lhs(t_k) = d/dt E_rel by finite differences (centered inside, one-sided at
/// the ends), rhs(t_k) = int m2 dx.
std::pair<std::vector<double>, std::vector<double>> dissipation_identity(
    const std::vector<GridField>& rho_traj, const std::vector<GridField>& flux_traj,
    const Rho0Sampler& rho0);

/// L1 norm over the interior of the finite-difference residual of
/// d_t eta(rho) + div(eta(rho) v + Q(rho) e2) at the middle time, with
/// d_t from the t -+ dt samples.
double entropy_residual_l1(const GridField& rho_minus, const GridField& rho_mid,
                           const GridField& rho_plus, const GridField& vel_mid,
                           const Entropy& entropy, double dt);

/// max over the grid of |2(m - rho v) + (1 - rho^2) e2| - (1 - rho^2).
double hull_check(const GridField& rho, const GridField& vel, const GridField& flux);

struct FlatOracle {
  double rho, v2, m2, e_rel, dedt;
};

/// Closed forms for the flat interface: rho = clamp(x2 / 2t), v = 0,
/// m2 = -(1 - rho^2), E_rel = -8 pi t^2 / 3, dE/dt = -16 pi t / 3.
FlatOracle flat_oracle(double t, double x2);

/// Level curves of one time slice on a common (x1, h) grid.
struct LevelCurveSet {
  double time = 0.0;
  std::vector<double> x1, h;
  std::vector<std::vector<double>> vals;  // [h][x1]
};

struct ExpansionFit {
  bool exact_zero = false;
  double slope = 0.0;
  std::vector<double> remainders;  // sup |gamma_t - gamma_0 - t(2h + s0)| per time
};

/// Log-log fit of the expansion remainder against t. gamma0_x and s0_x are
/// samples on the same x1 grid as the curves.
ExpansionFit expansion_check(const std::vector<LevelCurveSet>& curves,
                             const std::vector<double>& gamma0_x,
                             const std::vector<double>& s0_x);

/// Per-time-node records for a sampled trajectory (rho, v, m on a common grid).
std::vector<DiagnosticsRecord> diagnose_trajectory(const std::vector<GridField>& rho,
                                                   const std::vector<GridField>& vel,
                                                   const std::vector<GridField>& flux,
                                                   const Rho0Sampler& rho0,
                                                   const std::vector<Entropy>& entropies);

}  // namespace mipm
