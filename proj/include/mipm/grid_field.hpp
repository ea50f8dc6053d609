#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mipm/util.hpp"

namespace mipm {

/// Eulerian samples on T x [-L, L]. x1 nodes are 2 pi i / nx1 (periodic);
/// x2 nodes are either inclusive of the endpoints (node grid) or cell
/// centers (finite-volume convention).
struct GridField {
  int nx1 = 0, nx2 = 0, ncomp = 1;
  bool cell_centered = false;
  double L = 0.0;
  double time = 0.0;
  std::vector<double> v;  // [(c * nx2 + j) * nx1 + i]

  GridField() = default;
  GridField(int nx1_, int nx2_, double L_, double time_, int ncomp_ = 1,
            bool cell_centered_ = false)
      : nx1(nx1_), nx2(nx2_), ncomp(ncomp_), cell_centered(cell_centered_), L(L_),
        time(time_), v(static_cast<size_t>(nx1_) * nx2_ * ncomp_, 0.0) {}

  double x1(int i) const { return kTwoPi * i / nx1; }
  double dx1() const { return kTwoPi / nx1; }
  double dx2() const { return cell_centered ? 2.0 * L / nx2 : 2.0 * L / (nx2 - 1); }
  double x2(int j) const { return -L + (cell_centered ? (j + 0.5) * dx2() : j * dx2()); }
  /// x2 quadrature weight (trapezoid on node grids, cell sums otherwise)
  double w2(int j) const {
    double h = dx2();
    if (!cell_centered && (j == 0 || j == nx2 - 1)) return 0.5 * h;
    return h;
  }

  double& at(int c, int i, int j) { return v[(static_cast<size_t>(c) * nx2 + j) * nx1 + i]; }
  double at(int c, int i, int j) const { return v[(static_cast<size_t>(c) * nx2 + j) * nx1 + i]; }

  void check_compatible(const GridField& o, const std::string& what) const {
    if (nx1 != o.nx1 || nx2 != o.nx2 || cell_centered != o.cell_centered || L != o.L)
      throw std::invalid_argument(what + ": fields on different grids");
  }
};

/// Integral over the strip: sum of samples times cell measures.
double grid_integral(const GridField& f, int comp = 0);

/// Bilinear resampling onto the sample points of `like` (periodic in x1,
/// clamped in x2). Requires equal strip heights.
GridField resample_to(const GridField& src, const GridField& like);

}  // namespace mipm
