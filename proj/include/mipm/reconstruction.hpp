#pragma once

#include <optional>

#include "mipm/grid_field.hpp"
#include "mipm/levelset.hpp"

namespace mipm {

enum class Region { below, inside, above };

struct InvertResult {
  Region region = Region::inside;
  double y2 = 0.0;  // meaningful when region == inside
};

/// Evaluates the solved ansatz field f(t,y) = gamma0 + t s0 + w/2 anywhere in
/// time and space, and undoes the level-set transformation: density, velocity,
/// flux and level curves of the macroscopic solution.
class LevelSetSolution {
 public:
  explicit LevelSetSolution(LevelSetRun run);

  const LevelSetRun& run() const { return run_; }
  double horizon() const { return run_.eta.times.back(); }

  /// f(t, x1, y2): Fourier in x1, linear in y2 between stored rows, linear in
  /// w = t^{1+alpha} eta between stored times.
  double f(double t, double x1, double y2) const;
  double f_y1(double t, double x1, double y2) const;
  double f_y2(double t, double x1, double y2) const;

  /// Mixing-zone boundaries +-2t + f(t, x1, +-2).
  double upper_boundary(double t, double x1) const;
  double lower_boundary(double t, double x1) const;

  /// Solves t y2 + f(t, x1, y2) = x2 for y2 in [-2, 2] (bisection to 1e-12,
  /// then two Newton polish steps), or tags the point as above/below.
  InvertResult invert_transform(double t, double x1, double x2) const;

  /// Piecewise density: +-1 outside, (X_t^{-1}(x))_2 / 2 in the mixing zone.
  double density_at(double t, double x1, double x2) const;

  /// Volume Biot-Savart quadrature v = 1/2 int K(x - X_t(z)) d_y1 f(t,z) dz
  /// over T x (-2,2), with a refined z1 window around the singular column
  /// z1 = x1 and zero at singular nodes.
  std::array<double, 2> velocity_at(double t, double x1, double x2) const;

  /// gamma_t(x1, h) = 2 h t + f(t, x1, 2h) on the given x1 grid.
  std::vector<double> level_curve(double t, double h, int nx1) const;

  double mixing_zone_area(double t, int nx1 = 256) const;

  // grid samplers (x1 columns outer so per-column tables are reused)
  GridField sample_density(double t, int nx1, int nx2, double L, bool cell_centered = false) const;
  GridField sample_velocity(double t, int nx1, int nx2, double L, bool cell_centered = false) const;

  /// m = rho v - mu (1 - rho^2) e2 assembled from matching samples.
  static GridField assemble_flux(const GridField& rho, const GridField& vel, double mu);

 private:
  LevelSetRun run_;
  std::vector<std::vector<TrigSeries>> wrows_;  // [time][row] spectra of w
  int n2_;
  std::vector<double> y2_;

  struct TimeLoc {
    int lo, hi;
    double th;
  };
  TimeLoc locate_time(double t) const;
  double w_eval(double t, double x1, double y2, int deriv) const;
  double w_row_eval(int ti, int row, double x1, int deriv) const;
};

/// m = rho v - mu (1 - rho^2) e2 for a single sample.
std::array<double, 2> flux_m(double rho, const std::array<double, 2>& v, double mu);

}  // namespace mipm
