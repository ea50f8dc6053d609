#pragma once

#include <utility>
#include <vector>

#include "mipm/util.hpp"

namespace mipm {

/// Saturation profile on a uniform 1-D grid over [-L, L]; cell averages in
/// [0, 1], cells centered at -L + (i + 1/2) dy.
struct Theta1D {
  double L = 3.0;
  std::vector<double> theta;

  int n() const { return static_cast<int>(theta.size()); }
  double dy() const { return 2.0 * L / n(); }
  double y(int i) const { return -L + (i + 0.5) * dy(); }
  double mass() const;

  /// Cell averages of the unstable step 1_{y < 0}.
  static Theta1D step_data(double L, int cells);
};

/// Squared L2-Wasserstein distance between equal-mass profiles, computed
/// exactly from piecewise-linear quantile functions: int_0^m |Qa - Qb|^2 ds.
double w2_distance_1d(const Theta1D& a, const Theta1D& b);

struct JkoConfig {
  double obj_tol = 1e-10;
  int max_inner = 10000;
};

struct JkoStepReport {
  double h = 0.0;
  double objective = 0.0;
  int inner_iterations = 0;
  bool converged = false;
  std::vector<double> a, abar;  // Kantorovich potentials at the optimum
  double el_residual = 0.0;     // min_c max over inactive cells |a - abar - h y - c|
};

/// One minimizing-movements step: minimizer over {0 <= theta <= 1,
/// sum theta dy = m0} of
///   1/2 W2^2(theta_k, theta) + 1/2 W2^2(1 - theta_k, 1 - theta) - h int theta y dy,
/// by projected gradient descent with Barzilai-Borwein steps, safeguarded by
/// halving on non-descent. Gradients come from the 1-D monotone transport maps.
std::pair<Theta1D, JkoStepReport> jko_step(const Theta1D& theta_k, double h,
                                           const JkoConfig& cfg = {});

struct JkoRun {
  std::vector<Theta1D> states;        // theta^(0) .. theta^(n)
  std::vector<JkoStepReport> reports; // per step
};

JkoRun run_jko(const Theta1D& theta0, double h, int n_steps, const JkoConfig& cfg = {});

/// Entropy solution of d_t theta + d_y (theta (1 - theta)) = 0 from step data:
/// the rarefaction theta = clamp((1 - y/t)/2, 0, 1).
double burgers_exact(double t, double y);

}  // namespace mipm
