#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mipm/initial_data.hpp"
#include "mipm/reconstruction.hpp"
#include "oracle_helpers.hpp"

using namespace mipm;

namespace {

SolverConfig test_config(double T = 0.05, int n_times = 6) {
  SolverConfig c;
  c.n1 = 32;
  c.n2 = 17;
  c.quad_z1 = 128;
  c.ms = 16;
  c.n_times = n_times;
  c.T = T;
  c.tol = 1e-10;
  return c;
}

const LevelSetSolution& flat_solution() {
  static LevelSetSolution sol(solve_levelset(AnalyticGraph::flat(), test_config(0.6, 4)));
  return sol;
}

const LevelSetSolution& cos_solution() {
  static LevelSetSolution sol(solve_levelset(AnalyticGraph::cosine(0.1, 1), test_config()));
  return sol;
}

}  // namespace

TEST_CASE("invert_transform: flat case and tags") {
  const auto& sol = flat_solution();
  auto r = sol.invert_transform(0.5, 0.3, 0.4);
  REQUIRE(r.region == Region::inside);
  CHECK(r.y2 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(sol.invert_transform(0.5, 0.0, 1.1).region == Region::above);
  CHECK(sol.invert_transform(0.5, 0.0, -1.1).region == Region::below);
  CHECK_THROWS_AS(sol.invert_transform(0.0, 0.0, 0.5), std::domain_error);
}

TEST_CASE("invert_transform: round trip through X_t") {
  const auto& sol = cos_solution();
  double t = 0.05;
  for (double x1 : {0.0, 1.1, 2.9, 5.0}) {
    for (double frac : {0.1, 0.45, 0.8}) {
      double x2 = sol.lower_boundary(t, x1) +
                  frac * (sol.upper_boundary(t, x1) - sol.lower_boundary(t, x1));
      auto r = sol.invert_transform(t, x1, x2);
      REQUIRE(r.region == Region::inside);
      double back = t * r.y2 + sol.f(t, x1, r.y2);
      CHECK(std::abs(back - x2) < 1e-10);
    }
  }
}

TEST_CASE("density_at: flat profile matches x2 / 2t") {
  const auto& sol = flat_solution();
  CHECK(sol.density_at(0.5, 0.2, 0.4) == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(sol.density_at(0.5, 0.2, 1.5) == 1.0);
  CHECK(sol.density_at(0.5, 0.2, -1.5) == -1.0);
  CHECK(sol.density_at(0.25, 0.0, 0.75) == doctest::Approx(1.0));  // x2 = 3t
}

TEST_CASE("density_at: mixing-zone midpoint follows s0") {
  const auto& sol = cos_solution();
  double t = 0.05;
  double s00 = sol.run().s0.series.eval(0.0, 0);
  double x2 = 0.1 + t * s00;  // gamma0(0) + t s0(0)
  double rho = sol.density_at(t, 0.0, x2);
  CHECK(std::abs(rho) < 2.0 * std::pow(t, 0.5));  // 0 + O(t^alpha)
}

TEST_CASE("velocity_at: flat solution has zero velocity") {
  const auto& sol = flat_solution();
  auto v = sol.velocity_at(0.4, 1.0, 0.3);
  CHECK(std::abs(v[0]) < 1e-14);
  CHECK(std::abs(v[1]) < 1e-14);
}

TEST_CASE("velocity_at: t -> 0 limit matches the vortex-sheet field") {
  auto g = AnalyticGraph::cosine(0.05, 1);
  LevelSetSolution sol(solve_levelset(g, test_config(0.02, 6)));
  double x1 = 0.7, x2 = 0.8;  // safely off the interface
  auto ref = initial_velocity(g, x1, x2, VelocityMode::off_interface, 4096);
  auto v = sol.velocity_at(sol.run().eta.times[1], x1, x2);  // smallest positive node
  CHECK(std::abs(v[0] - ref.v[0]) < 1e-4);
  CHECK(std::abs(v[1] - ref.v[1]) < 1e-4);
}

TEST_CASE("velocity decay in the far field") {
  const auto& sol = cos_solution();
  double t = 0.05;
  double m3 = 0.0, m4 = 0.0;
  for (double x1 : {0.0, 1.5, 3.1, 4.6}) {
    auto a = sol.velocity_at(t, x1, 3.0);
    auto b = sol.velocity_at(t, x1, 4.0);
    m3 = std::max(m3, std::hypot(a[0], a[1]));
    m4 = std::max(m4, std::hypot(b[0], b[1]));
  }
  CHECK(m4 / m3 < 1.2 * std::exp(-1.0));
}

TEST_CASE("flux_m") {
  CHECK(flux_m(0.0, {0.0, 0.0}, 1.0)[1] == doctest::Approx(-1.0));
  CHECK(flux_m(0.0, {0.0, 0.0}, 1.0)[0] == 0.0);
  auto p = flux_m(1.0, {0.3, -0.2}, 1.0);
  CHECK(p[0] == doctest::Approx(0.3));
  CHECK(p[1] == doctest::Approx(-0.2));
  auto q = flux_m(0.5, {1.0, 0.0}, 1.0);
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[1] == doctest::Approx(-0.75));
}

TEST_CASE("level curves") {
  const auto& flat = flat_solution();
  auto c = flat.level_curve(0.3, 0.5, 8);
  for (double v : c) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));  // 2ht
  // t = 0 gives gamma0 for every h
  const auto& sol = cos_solution();
  for (double h : {-1.0, 0.0, 0.7}) {
    auto c0 = sol.level_curve(0.0, h, 16);
    for (int i = 0; i < 16; ++i)
      CHECK(c0[i] == doctest::Approx(0.1 * std::cos(kTwoPi * i / 16)).epsilon(1e-13));
  }
}

TEST_CASE("Lipschitz bound: |grad rho| t stable under refinement") {
  const auto& sol = cos_solution();
  auto measure = [&](double t, int n) {
    GridField rho = sol.sample_density(t, n, n + 1, 1.0);
    double worst = 0.0;
    double d1 = rho.dx1(), d2 = rho.dx2();
    for (int j = 1; j + 1 < rho.nx2; ++j)
      for (int i = 0; i < n; ++i) {
        int ip = (i + 1) % n, im = (i + n - 1) % n;
        double gx = (rho.at(0, ip, j) - rho.at(0, im, j)) / (2 * d1);
        double gy = (rho.at(0, i, j + 1) - rho.at(0, i, j - 1)) / (2 * d2);
        worst = std::max(worst, std::hypot(gx, gy));
      }
    return worst * t;
  };
  double c64 = measure(0.04, 64), c128 = measure(0.04, 128);
  MESSAGE("grad-rho * t at two resolutions: ", c64, " ", c128);
  CHECK(c64 < 2.0);
  CHECK(std::abs(c128 - c64) < 0.25 * c64);
}

TEST_CASE("sampled velocity: discrete divergence and curl") {
  // The quadrature field is a finite sum of translated kernels, hence exactly
  // divergence free away from the quadrature images; finite differences see
  // that cleanly outside the mixing zone. Inside, the curl must reproduce
  // -d_x1 rho against the node noise.
  const auto& sol = cos_solution();
  double t = 0.05;
  auto measure = [&](int n) {
    GridField vel = sol.sample_velocity(t, n, n + 1, 1.0);
    GridField rho = sol.sample_density(t, n, n + 1, 1.0);
    double div_out = 0.0, curl = 0.0;
    int cout_ = 0, ccurl = 0;
    double d1 = vel.dx1(), d2 = vel.dx2();
    for (int j = 1; j + 1 < vel.nx2; ++j)
      for (int i = 0; i < n; ++i) {
        int ip = (i + 1) % n, im = (i + n - 1) % n;
        double x2 = vel.x2(j);
        double dv1 = (vel.at(0, ip, j) - vel.at(0, im, j)) / (2 * d1);
        double dv2 = (vel.at(1, i, j + 1) - vel.at(1, i, j - 1)) / (2 * d2);
        bool outside = x2 > sol.upper_boundary(t, vel.x1(i)) + 2 * d2 ||
                       x2 < sol.lower_boundary(t, vel.x1(i)) - 2 * d2;
        if (outside) {
          div_out += std::abs(dv1 + dv2);
          ++cout_;
        }
        double w = (vel.at(1, ip, j) - vel.at(1, im, j)) / (2 * d1) -
                   (vel.at(0, i, j + 1) - vel.at(0, i, j - 1)) / (2 * d2);
        double drho = (rho.at(0, ip, j) - rho.at(0, im, j)) / (2 * d1);
        curl += std::abs(w + drho);
        ++ccurl;
      }
    return std::pair{div_out / std::max(cout_, 1), curl / ccurl};
  };
  auto [d32, c32] = measure(32);
  auto [d64, c64] = measure(64);
  MESSAGE("exterior mean div ", d32, " -> ", d64, ", mean curl defect ", c32, " -> ", c64);
  CHECK(d64 < 0.5 * d32);
  CHECK(d64 < 1e-4);
  CHECK(c64 < 0.75 * c32);
}

TEST_CASE("log-Lipschitz modulus of the velocity") {
  const auto& sol = cos_solution();
  double t = 0.05;
  double worst = 0.0;
  for (double x1 : {0.3, 2.0, 4.4}) {
    for (double r : {1e-2, 1e-3}) {
      auto a = sol.velocity_at(t, x1, 0.05);
      auto b = sol.velocity_at(t, x1 + r, 0.05 + r);
      double dist = std::sqrt(2.0) * r;
      double num = std::hypot(a[0] - b[0], a[1] - b[1]);
      worst = std::max(worst, num / (dist * std::abs(std::log(dist))));
    }
  }
  CHECK(worst * t < 5.0);  // measured C0, bounded
}

TEST_CASE("transport-form residual decreases under refinement") {
  const auto& sol = cos_solution();
  double t = 0.04;
  auto residual = [&](int n) {
    double dt = 0.1 / n;
    GridField rm = sol.sample_density(t - dt, n, n + 1, 0.5);
    GridField r0 = sol.sample_density(t, n, n + 1, 0.5);
    GridField rp = sol.sample_density(t + dt, n, n + 1, 0.5);
    GridField vel = sol.sample_velocity(t, n, n + 1, 0.5);
    double d1 = r0.dx1(), d2 = r0.dx2();
    double l1 = 0.0;
    int count = 0;
    for (int j = 1; j + 1 < r0.nx2; ++j)
      for (int i = 0; i < n; ++i) {
        // interior mixing-zone points only (margin away from the kinks)
        double x2 = r0.x2(j);
        if (x2 < sol.lower_boundary(t, r0.x1(i)) + 2 * d2 ||
            x2 > sol.upper_boundary(t, r0.x1(i)) - 2 * d2)
          continue;
        int ip = (i + 1) % n, im = (i + n - 1) % n;
        double ddt = (rp.at(0, i, j) - rm.at(0, i, j)) / (2 * dt);
        double gx = (r0.at(0, ip, j) - r0.at(0, im, j)) / (2 * d1);
        double gy = (r0.at(0, i, j + 1) - r0.at(0, i, j - 1)) / (2 * d2);
        double res = ddt + vel.at(0, i, j) * gx + vel.at(1, i, j) * gy +
                     2.0 * r0.at(0, i, j) * gy;
        l1 += std::abs(res);
        ++count;
      }
    return l1 / std::max(count, 1);
  };
  double r64 = residual(64), r128 = residual(128);
  MESSAGE("transport residual ", r64, " -> ", r128);
  CHECK(r64 > 0.0);
  CHECK(r128 < 0.75 * r64);
}

TEST_CASE("hull identity on sampled fields") {
  const auto& sol = cos_solution();
  double t = 0.05;
  GridField rho = sol.sample_density(t, 32, 33, 1.0);
  GridField vel = sol.sample_velocity(t, 32, 33, 1.0);
  GridField m1 = LevelSetSolution::assemble_flux(rho, vel, 1.0);
  GridField m09 = LevelSetSolution::assemble_flux(rho, vel, 0.9);
  // |2(m - rho v) + (1 - rho^2) e2| - (1 - rho^2): 0 at mu = 1, < 0 at mu = 0.9
  for (int j = 0; j < rho.nx2; ++j)
    for (int i = 0; i < rho.nx1; ++i) {
      double r = rho.at(0, i, j);
      double c1 = 2.0 * (m1.at(1, i, j) - r * vel.at(1, i, j)) + (1.0 - r * r);
      CHECK(std::abs(std::abs(c1) - (1.0 - r * r)) < 1e-12);
      double c9 = 2.0 * (m09.at(1, i, j) - r * vel.at(1, i, j)) + (1.0 - r * r);
      CHECK(std::abs(c9) <= (1.0 - r * r) + 1e-12);
    }
}
