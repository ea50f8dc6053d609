#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mipm/analytic_graph.hpp"
#include "mipm/initial_data.hpp"
#include "mipm/util.hpp"

namespace mipm {

/// Scalar field on the solver grid: n2 rows (y2 uniform on [-2, 2], endpoints
/// included) by n1 columns (y1 = 2 pi a / n1).
struct Field {
  int n1 = 0, n2 = 0;
  std::vector<double> v;  // v[b * n1 + a]

  Field() = default;
  Field(int n1_, int n2_) : n1(n1_), n2(n2_), v(static_cast<size_t>(n1_) * n2_, 0.0) {}

  double& at(int a, int b) { return v[static_cast<size_t>(b) * n1 + a]; }
  double at(int a, int b) const { return v[static_cast<size_t>(b) * n1 + a]; }
  double sup() const;
  double y2_node(int b) const { return -2.0 + 4.0 * b / (n2 - 1); }
};

double sup_diff(const Field& x, const Field& y);

/// Spectral derivative in y1 (per row) and 4th-order finite differences in y2.
Field d_y1(const Field& f);
Field d_y2(const Field& f);

struct SolverConfig {
  double alpha = 0.5;
  double T = 0.05;
  int n_times = 12;         // positive geometric time nodes; t_0 = 0 is added
  double time_ratio = 0.7;  // t_i = T * ratio^(n_times - i)
  int n1 = 64;              // y1 modes / target columns (power of two)
  int n2 = 33;              // y2 nodes including endpoints
  int quad_z1 = 256;        // uniform z1 quadrature nodes (multiple of n1)
  int ms = 32;              // graded s-mesh nodes per target time
  double graded_p = 2.0;    // s_j = t (j/ms)^p
  double tol = 1e-10;
  int max_iters = 25;
  // Graded two-sided refinement of the z1 quadrature on |z1| <= refine_cells * dz,
  // resolving the kernel transition layer of width ~ t|y2 - z2| at small times.
  int refine_cells = 4;
  double refine_ratio = 0.6;
  double refine_floor = 1e-9;

  void validate() const;
};

/// Correction field eta on the time grid. eta(t_0) = 0 identically and every
/// stored field stays inside the unit ball of |eta| + |d_y1 eta| + |d_y2 eta|.
struct EtaTrajectory {
  double alpha = 0.5;
  std::vector<double> times;   // t_0 = 0 < ... <= T
  std::vector<Field> values;   // per time node
  bool converged = false;
};

struct ConvergenceReport {
  std::vector<double> lambda;  // successive sup-norm differences per Picard sweep
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
};

struct solver_failure : std::runtime_error {
  ConvergenceReport report;
  solver_failure(const std::string& msg, ConvergenceReport r)
      : std::runtime_error(msg), report(std::move(r)) {}
};

/// Instrumentation of one F evaluation.
struct FStats {
  double max_integrand = 0.0;          // sup |K2(DX) D d_y1 f| over quad nodes
  double max_nondegeneracy_ratio = 0.0;  // sup t|y2 - z2| / |DX|_*
  double min_star_norm = 0.0;          // inf |DX|_* over non-singular nodes
};

struct AnsatzFields {
  Field f, fy1, fy2;
};

/// Composite z1 quadrature: uniform periodic trapezoid outside a central
/// window |z1| <= W, two-sided geometric refinement inside (levels W r^j,
/// each level split into sub-cells that refine with the grid). W is tied to
/// the reference 256-node grid so the rule converges under node doubling.
struct CompositeZ1Rule {
  int nq = 0;
  std::vector<double> uw;            // per uniform node c: weight (0 in window)
  std::vector<double> soff, sw;      // signed refined offsets (excluding 0, +-W)
  double zero_w = 0.0;               // weight of the z1 = 0 limit node
  double window = 0.0;
};

CompositeZ1Rule make_z1_rule(int nq, int refine_cells, double ratio, double floor_val);

/// The nonlinear operator F_t and everything precomputable about the
/// quadrature for a fixed interface, normal velocity and grid.
class LevelSetOperator {
 public:
  LevelSetOperator(AnalyticGraph gamma, NormalVelocity s0, SolverConfig cfg);

  /// f(t,.) = gamma0 + t s0 + w/2 on the grid, with w = t^{1+alpha} eta.
  AnsatzFields assemble_f(const Field& eta, double t) const;

  /// F_t(eta): minus the tensor quadrature of
  ///   K2(DX_t) D d_y1 f_t  -  K2(DX_0) D gamma0'
  /// over T x (-2,2); zero field at t = 0. Throws on a broken transform
  /// (monotonicity) or numerically degenerate DX (cone check).
  Field eval_F(const Field& eta, double t, FStats* stats = nullptr) const;

  /// Same operator expressed through the integrated correction w = t^{1+alpha} eta.
  Field eval_F_w(const Field& w, double t, FStats* stats = nullptr) const;

  const SolverConfig& config() const { return cfg_; }
  const AnalyticGraph& gamma() const { return gamma_; }
  const NormalVelocity& s0() const { return s0_; }

 private:
  AnalyticGraph gamma_;
  NormalVelocity s0_;
  SolverConfig cfg_;

  // quadrature geometry
  int nq_ = 0, nsub_side_ = 0, stride_ = 0;
  double zero_w_ = 0.0;                     // weight of the z1 = 0 limit node
  std::vector<double> uw_;                  // uniform node weights (0 inside window)
  std::vector<double> usin_, usin2h_;       // sin(z1), sin^2(z1/2) at uniform nodes
  std::vector<double> sub_off_, sub_w_;     // signed offsets and weights, both sides
  std::vector<double> ssin_, ssin2h_;
  std::vector<double> wz2_;                 // z2 trapezoid weights

  // interface data on evaluation points
  std::vector<double> g0_u_, g0p_u_, s0_u_, s0p_u_;      // uniform grid (nq)
  std::vector<double> g0_s_, g0p_s_, s0_s_, s0p_s_;      // n1 * nsub sub-points
  std::vector<double> s0_quad_;                          // discrete s0 at targets
  std::vector<double> y2_;

  // lazily built trig tables for row-spectrum evaluation on fixed points
  mutable std::vector<double> trig_u_cos_, trig_u_sin_, trig_s_cos_, trig_s_sin_;

  void eval_w_tables(const Field& w, double t, std::vector<double>& qu,
                     std::vector<double>& su, std::vector<double>& qr,
                     std::vector<double>& sr) const;

  template <bool POLY, bool STATS>
  void main_loop(const std::vector<double>& qu, const std::vector<double>& su,
                 const std::vector<double>& qr, const std::vector<double>& sr, double t,
                 Field& F, FStats* stats) const;
};

/// Composite trapezoid of field samples on the graded mesh s_j, divided by
/// t^{1+alpha}. Nodes and samples must match; s_0 = 0, s_back = t.
Field time_weighted_average(std::span<const Field> samples, std::span<const double> s_nodes,
                            double t, double alpha);
double time_weighted_average(std::span<const double> samples, std::span<const double> s_nodes,
                             double t, double alpha);

std::vector<double> graded_mesh(double t, int ms, double p);

/// Weighted Picard iteration for the fixed point
///   eta(t) = t^-(1+alpha) int_0^t F_s(eta_s) ds.
/// Between stored nodes the iterate enters the s-integral through linear
/// interpolation of w(t) = t^{1+alpha} eta(t).
std::pair<EtaTrajectory, ConvergenceReport> solve_eta(const AnalyticGraph& gamma,
                                                      const SolverConfig& cfg);

/// A solved trajectory bundled with the data needed to evaluate it.
struct LevelSetRun {
  AnalyticGraph gamma;
  NormalVelocity s0;
  SolverConfig config;
  EtaTrajectory eta;
  ConvergenceReport report;
};

LevelSetRun solve_levelset(const AnalyticGraph& gamma, const SolverConfig& cfg);

/// Structured-text checkpoint: header (alpha, grids, interface and s0
/// coefficients) plus per-time blocks of row spectra; exact round trip.
void save_checkpoint(const LevelSetRun& run, std::ostream& os);
LevelSetRun load_checkpoint(std::istream& is);
void save_report(const ConvergenceReport& rep, std::ostream& os);

}  // namespace mipm
