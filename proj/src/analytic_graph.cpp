#include "mipm/analytic_graph.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mipm/util.hpp"

namespace mipm {

AnalyticGraph AnalyticGraph::from_coeffs(const std::vector<std::pair<int, cd>>& coeffs) {
  int kmax = 0;
  for (const auto& [k, v] : coeffs) kmax = std::max(kmax, std::abs(k));
  std::vector<cd> pos(kmax + 1, cd(0.0)), neg(kmax + 1, cd(0.0));
  std::vector<bool> has_pos(kmax + 1, false), has_neg(kmax + 1, false);
  for (const auto& [k, v] : coeffs) {
    if (k >= 0) {
      pos[k] += v;
      has_pos[k] = true;
    }
    if (k <= 0) {
      neg[-k] += v;
      has_neg[-k] = true;
    }
  }
  if (std::abs(pos[0].imag()) > 1e-14 * (1.0 + std::abs(pos[0])))
    throw validation_error("interface coefficients: c_0 must be real");
  for (int k = 1; k <= kmax; ++k) {
    if (has_pos[k] != has_neg[k])
      throw validation_error("interface coefficients: missing conjugate partner for k = " +
                             std::to_string(k));
    cd defect = neg[k] - std::conj(pos[k]);
    if (std::abs(defect) > 1e-12 * (1.0 + std::abs(pos[k])))
      throw validation_error("interface coefficients: conjugate symmetry broken at k = " +
                             std::to_string(k));
  }
  AnalyticGraph g;
  g.series.c.assign(pos.begin(), pos.end());
  g.series.c[0] = cd(pos[0].real(), 0.0);
  g.rho0 = estimate_strip_radius(g.series);
  return g;
}

AnalyticGraph AnalyticGraph::flat() {
  AnalyticGraph g;
  g.series.c = {cd(0.0)};
  g.rho0 = 1.0;
  return g;
}

AnalyticGraph AnalyticGraph::cosine(double amplitude, int wavenumber) {
  // amplitude * cos(k x) = amplitude/2 * (e^{ikx} + e^{-ikx})
  AnalyticGraph g;
  g.series.c.assign(wavenumber + 1, cd(0.0));
  g.series.c[wavenumber] = cd(0.5 * amplitude, 0.0);
  g.rho0 = estimate_strip_radius(g.series);
  return g;
}

bool AnalyticGraph::is_flat() const {
  for (const auto& v : series.c)
    if (v != cd(0.0)) return false;
  return series.nyq == 0.0;
}

cd graph_eval(const AnalyticGraph& g, cd y1, int deriv_order) {
  if (std::abs(y1.imag()) > g.rho0)
    throw std::domain_error("graph_eval: point outside the certified strip |Im y1| <= rho0");
  if (deriv_order < 0 || deriv_order > 3)
    throw std::invalid_argument("graph_eval: deriv_order must be in 0..3");
  return g.series.eval_complex(y1, deriv_order);
}

double estimate_strip_radius(const TrigSeries& s) {
  const double cap = 1.0;
  auto bound = [&](double rho) {
    // 8 sum_{k != 0} |k c_k| sinh(|k| rho), full spectrum (both signs of k)
    double acc = 0.0;
    for (int k = 1; k <= s.kmax(); ++k)
      acc += 2.0 * k * std::abs(s.c[k]) * std::sinh(k * rho);
    if (s.nyq != 0.0) {
      int n = s.kmax() + 1;
      acc += 2.0 * n * std::abs(0.5 * s.nyq) * std::sinh(n * rho);
    }
    return 8.0 * acc;
  };
  if (bound(cap) < 1.0) return cap;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (bound(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

void save_graph(const AnalyticGraph& g, std::ostream& os) {
  os << std::setprecision(17) << std::scientific;
  for (int k = 0; k <= g.series.kmax(); ++k) {
    os << k << " " << g.series.c[k].real() << " " << g.series.c[k].imag() << "\n";
    if (k > 0) os << -k << " " << g.series.c[k].real() << " " << -g.series.c[k].imag() << "\n";
  }
}

AnalyticGraph load_graph(std::istream& is) {
  std::vector<std::pair<int, cd>> coeffs;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int k;
    double re, im;
    if (!(ls >> k >> re >> im))
      throw validation_error("interface file: bad line '" + line + "'");
    coeffs.emplace_back(k, cd(re, im));
  }
  return AnalyticGraph::from_coeffs(coeffs);
}

void save_graph_file(const AnalyticGraph& g, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  save_graph(g, os);
}

AnalyticGraph load_graph_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw missing_artifact_error("cannot open " + path);
  return load_graph(is);
}

}  // namespace mipm
