#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mipm/levelset.hpp"
#include "oracle_helpers.hpp"

using namespace mipm;

namespace {

SolverConfig small_config() {
  SolverConfig c;
  c.n1 = 16;
  c.n2 = 9;
  c.quad_z1 = 64;
  c.ms = 8;
  c.n_times = 5;
  c.T = 0.04;
  c.tol = 1e-9;
  c.max_iters = 12;
  return c;
}

}  // namespace

TEST_CASE("field derivative helpers") {
  Field f(16, 9);
  for (int b = 0; b < 9; ++b)
    for (int a = 0; a < 16; ++a) {
      double y1 = kTwoPi * a / 16, y2 = -2.0 + 4.0 * b / 8;
      f.at(a, b) = std::cos(y1) * (1.0 + 0.3 * y2 * y2);
    }
  Field fy1 = d_y1(f), fy2 = d_y2(f);
  for (int b = 0; b < 9; ++b)
    for (int a = 0; a < 16; ++a) {
      double y1 = kTwoPi * a / 16, y2 = -2.0 + 4.0 * b / 8;
      CHECK(fy1.at(a, b) == doctest::Approx(-std::sin(y1) * (1.0 + 0.3 * y2 * y2)).epsilon(1e-12));
      CHECK(fy2.at(a, b) == doctest::Approx(std::cos(y1) * 0.6 * y2).epsilon(1e-12));
    }
}

TEST_CASE("assemble_f") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  auto s0 = compute_s0(g, 256, 16);
  SolverConfig cfg = small_config();
  LevelSetOperator op(g, s0, cfg);
  Field eta(cfg.n1, cfg.n2);

  // t = 0: f = gamma0 on every node
  AnsatzFields f0 = op.assemble_f(eta, 0.0);
  for (int b = 0; b < cfg.n2; ++b)
    for (int a = 0; a < cfg.n1; ++a)
      CHECK(f0.f.at(a, b) == doctest::Approx(0.1 * std::cos(kTwoPi * a / cfg.n1)).epsilon(1e-14));

  // quoted example: f(0.01, 0, y2) = gamma0(0) + 0.01 s0(0) for all y2
  AnsatzFields f1 = op.assemble_f(eta, 0.01);
  double expect = 0.1 + 0.01 * s0.series.eval(0.0, 0);
  for (int b = 0; b < cfg.n2; ++b) CHECK(f1.f.at(0, b) == doctest::Approx(expect).epsilon(1e-13));

  // flat case: everything zero
  auto fl = AnalyticGraph::flat();
  LevelSetOperator opf(fl, compute_s0(fl, 256, 16), cfg);
  AnsatzFields ff = opf.assemble_f(eta, 0.3);
  CHECK(ff.f.sup() == 0.0);
  CHECK(ff.fy1.sup() == 0.0);
}

TEST_CASE("eval_F: trivial cases") {
  SolverConfig cfg = small_config();
  auto fl = AnalyticGraph::flat();
  LevelSetOperator op(fl, compute_s0(fl, 256, 16), cfg);
  Field eta(cfg.n1, cfg.n2);
  CHECK(op.eval_F(eta, 0.02).sup() == 0.0);  // flat data
  auto g = AnalyticGraph::cosine(0.1, 1);
  LevelSetOperator opc(g, compute_s0(g, 256, 16), cfg);
  CHECK(opc.eval_F(eta, 0.0).sup() == 0.0);  // t = 0 by definition
}

TEST_CASE("eval_F: affine term obeys C t |log t| with refinement-stable C") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  SolverConfig c1 = small_config();
  c1.n1 = 32;
  c1.n2 = 17;
  c1.quad_z1 = 256;
  SolverConfig c2 = c1;
  c2.quad_z1 = 512;
  auto s0 = compute_s0(g, 512, c1.n1);
  LevelSetOperator op1(g, s0, c1), op2(g, s0, c2);
  Field zero(c1.n1, c1.n2);
  for (double t : {1e-3, 1e-2, 1e-1}) {
    double f1 = op1.eval_F(zero, t).sup() / (t * std::abs(std::log(t)));
    double f2 = op2.eval_F(zero, t).sup() / (t * std::abs(std::log(t)));
    CHECK(f1 < 1.0);
    CHECK(std::abs(f1 - f2) < 0.05 * f2);
  }
}

TEST_CASE("eval_F: instrumented bounds (majorant, nondegeneracy, cone)") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  SolverConfig cfg = small_config();
  cfg.n1 = 32;
  cfg.n2 = 17;
  cfg.quad_z1 = 128;
  auto s0 = compute_s0(g, 512, cfg.n1);
  LevelSetOperator op(g, s0, cfg);
  Field eta(cfg.n1, cfg.n2);
  for (int b = 0; b < cfg.n2; ++b)
    for (int a = 0; a < cfg.n1; ++a)
      eta.at(a, b) = 0.02 * std::cos(kTwoPi * a / cfg.n1) * (1.0 + 0.1 * b);

  FStats s1, s2;
  op.eval_F(eta, 0.02, &s1);
  op.eval_F(eta, 0.04, &s2);
  // |K2(DX) D d_y1 f| <= C0 uniformly in t
  CHECK(s1.max_integrand < 1.0);
  CHECK(s2.max_integrand < 1.0);
  // nondegeneracy t|y2 - z2| <= C0 |DX|_*, stable in t
  CHECK(s1.max_nondegeneracy_ratio < 10.0);
  CHECK(s2.max_nondegeneracy_ratio < 10.0);
  CHECK(s2.max_nondegeneracy_ratio < 2.0 * s1.max_nondegeneracy_ratio + 1.0);
}

TEST_CASE("eval_F: monotonicity violation detected") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  SolverConfig cfg = small_config();
  auto s0 = compute_s0(g, 256, cfg.n1);
  LevelSetOperator op(g, s0, cfg);
  double t = 0.02;
  Field w(cfg.n1, cfg.n2);
  for (int b = 0; b < cfg.n2; ++b)
    for (int a = 0; a < cfg.n1; ++a) w.at(a, b) = 3.0 * t * (-2.0 + 4.0 * b / (cfg.n2 - 1));
  CHECK_THROWS_WITH_AS(op.eval_F_w(w, t), doctest::Contains("monotonicity"),
                       std::runtime_error);
}

TEST_CASE("time_weighted_average") {
  double t = 0.1, alpha = 0.5;
  auto mesh = graded_mesh(t, 32, 2.0);

  // constant integrand c -> c t^{-alpha}, exact
  std::vector<double> cs(mesh.size(), 3.0);
  CHECK(time_weighted_average(cs, mesh, t, alpha) ==
        doctest::Approx(3.0 * std::pow(t, -alpha)).epsilon(1e-13));

  // linear integrand s -> t^{1-alpha}/2, exact for the trapezoid
  std::vector<double> lin(mesh.size());
  for (size_t j = 0; j < mesh.size(); ++j) lin[j] = mesh[j];
  CHECK(time_weighted_average(lin, mesh, t, alpha) ==
        doctest::Approx(0.5 * std::pow(t, 1.0 - alpha)).epsilon(1e-13));

  // s |log s| against an adaptive reference, fine graded mesh
  auto fine = graded_mesh(t, 1024, 2.0);
  std::vector<double> sl(fine.size(), 0.0);
  for (size_t j = 1; j < fine.size(); ++j) sl[j] = fine[j] * std::abs(std::log(fine[j]));
  double got = time_weighted_average(sl, fine, t, alpha);
  double ref = oracle::adaptive_simpson([](double s) { return s == 0.0 ? 0.0 : s * std::abs(std::log(s)); },
                                        0.0, t, 1e-13) /
               std::pow(t, 1.0 + alpha);
  CHECK(std::abs(got - ref) < 1e-6 * std::abs(ref));

  // default solver mesh (ms = 32) documented accuracy: well under 1e-3 relative
  std::vector<double> sl32(mesh.size(), 0.0);
  for (size_t j = 1; j < mesh.size(); ++j) sl32[j] = mesh[j] * std::abs(std::log(mesh[j]));
  CHECK(std::abs(time_weighted_average(sl32, mesh, t, alpha) - ref) < 1e-3 * std::abs(ref));
}

TEST_CASE("solve_eta: flat data converges to zero in one sweep") {
  auto [eta, rep] = solve_eta(AnalyticGraph::flat(), small_config());
  CHECK(rep.iterations == 1);
  CHECK(rep.converged);
  for (const auto& f : eta.values) CHECK(f.sup() == 0.0);
  CHECK(eta.values.front().sup() == 0.0);  // eta(0) = 0 exactly
}

TEST_CASE("solve_eta: contraction, residual, growth and ball invariants") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  SolverConfig cfg = small_config();
  cfg.T = 0.05;
  cfg.n_times = 6;
  auto [eta, rep] = solve_eta(g, cfg);
  REQUIRE(rep.converged);
  REQUIRE(rep.lambda.size() >= 3);
  size_t n = rep.lambda.size();
  CHECK(rep.lambda[n - 1] <= 0.9 * rep.lambda[n - 2]);
  CHECK(rep.lambda[n - 2] <= 0.9 * rep.lambda[n - 3]);
  CHECK(rep.final_residual <= 2.0 * cfg.tol);

  CHECK(eta.values[0].sup() == 0.0);
  // measured growth |eta(t)| = O(t^{1-alpha} |log t|) on the smallest nodes
  auto ratio = [&](size_t i) {
    double t = eta.times[i];
    return eta.values[i].sup() / (std::pow(t, 1.0 - cfg.alpha) * std::abs(std::log(t)));
  };
  double rmax = ratio(eta.times.size() - 1);
  for (size_t i = 1; i <= 3; ++i) {
    CHECK(ratio(i) < 1.0);
    CHECK(ratio(i) <= 2.0 * rmax);
  }
  // unit ball of |eta| + |d_y1 eta| + |d_y2 eta| at every stored time
  for (size_t i = 0; i < eta.values.size(); ++i) {
    double ball = eta.values[i].sup() + d_y1(eta.values[i]).sup() + d_y2(eta.values[i]).sup();
    CHECK(ball < 1.0);
  }
}

TEST_CASE("solve_eta: alpha-invariance t^{1+a} eta^a") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  SolverConfig c3 = small_config();
  c3.alpha = 0.3;
  SolverConfig c6 = c3;
  c6.alpha = 0.6;
  auto [e3, r3] = solve_eta(g, c3);
  auto [e6, r6] = solve_eta(g, c6);
  double worst = 0.0;
  for (size_t i = 1; i < e3.times.size(); ++i) {
    double t = e3.times[i];
    for (size_t q = 0; q < e3.values[i].v.size(); ++q)
      worst = std::max(worst, std::abs(std::pow(t, 1.3) * e3.values[i].v[q] -
                                       std::pow(t, 1.6) * e6.values[i].v[q]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("solve_eta: quadrature self-convergence under z-node doubling") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  SolverConfig a = small_config(), b = small_config(), c = small_config();
  a.quad_z1 = 128;
  b.quad_z1 = 256;
  c.quad_z1 = 512;
  auto ra = solve_eta(g, a).first;
  auto rb = solve_eta(g, b).first;
  auto rc = solve_eta(g, c).first;
  double gab = 0.0, gbc = 0.0;
  for (size_t i = 0; i < ra.values.size(); ++i) {
    gab = std::max(gab, sup_diff(ra.values[i], rb.values[i]));
    gbc = std::max(gbc, sup_diff(rb.values[i], rc.values[i]));
  }
  MESSAGE("self-convergence gaps: ", gab, " -> ", gbc);
  CHECK(gbc <= gab);
  CHECK(gbc < 2e-4);
}

TEST_CASE("solve_eta: divergence or stagnation on oversized data/horizon") {
  auto g = AnalyticGraph::cosine(0.8, 2);
  SolverConfig cfg = small_config();
  cfg.T = 1.2;
  cfg.max_iters = 6;
  CHECK_THROWS_AS(solve_eta(g, cfg), solver_failure);
}

TEST_CASE("config validation") {
  SolverConfig c = small_config();
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), validation_error);
  c = small_config();
  c.quad_z1 = 100;  // not a power of two
  CHECK_THROWS_AS(c.validate(), validation_error);
  c = small_config();
  c.n2 = 10;  // even
  CHECK_THROWS_AS(c.validate(), validation_error);
}

TEST_CASE("checkpoint round trip") {
  auto g = AnalyticGraph::cosine(0.1, 1);
  SolverConfig cfg = small_config();
  LevelSetRun run = solve_levelset(g, cfg);
  std::stringstream ss;
  save_checkpoint(run, ss);
  LevelSetRun back = load_checkpoint(ss);
  CHECK(back.config.alpha == run.config.alpha);
  CHECK(back.report.iterations == run.report.iterations);
  CHECK(back.report.lambda.size() == run.report.lambda.size());
  REQUIRE(back.eta.times.size() == run.eta.times.size());
  for (size_t i = 0; i < run.eta.times.size(); ++i) {
    CHECK(back.eta.times[i] == run.eta.times[i]);
    CHECK(sup_diff(back.eta.values[i], run.eta.values[i]) < 1e-14);
  }
}
