#include "mipm/run_config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mipm {

namespace {

struct KeyVal {
  std::string section, key, value;
  int line;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<KeyVal> tokenize(std::istream& is) {
  std::vector<KeyVal> out;
  std::string line, section;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw validation_error("config line " + std::to_string(ln) + ": malformed section");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw validation_error("config line " + std::to_string(ln) + ": expected key = value");
    out.push_back({section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), ln});
  }
  return out;
}

double to_double(const KeyVal& kv) {
  try {
    size_t pos;
    double v = std::stod(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw validation_error("config line " + std::to_string(kv.line) + ": bad number for '" +
                           kv.key + "'");
  }
}

int to_int(const KeyVal& kv) {
  double v = to_double(kv);
  if (v != std::floor(v))
    throw validation_error("config line " + std::to_string(kv.line) + ": '" + kv.key +
                           "' must be an integer");
  return static_cast<int>(v);
}

std::vector<double> to_list(const KeyVal& kv) {
  std::istringstream ls(kv.value);
  std::vector<double> out;
  double v;
  while (ls >> v) out.push_back(v);
  if (out.empty())
    throw validation_error("config line " + std::to_string(kv.line) + ": empty list for '" +
                           kv.key + "'");
  return out;
}

void apply(RunConfig& c, const KeyVal& kv) {
  const std::string id = kv.section + "." + kv.key;
  if (id == "interface.preset") c.preset = kv.value;
  else if (id == "interface.amplitude") c.amplitude = to_double(kv);
  else if (id == "interface.wavenumber") c.wavenumber = to_int(kv);
  else if (id == "interface.coeff") {
    std::istringstream ls(kv.value);
    int k;
    double re, im;
    if (!(ls >> k >> re >> im))
      throw validation_error("config line " + std::to_string(kv.line) +
                             ": coeff expects 'k re im'");
    c.coeffs.emplace_back(k, cd(re, im));
  } else if (id == "run.alpha") c.alpha = to_double(kv);
  else if (id == "run.mu") c.mu = to_double(kv);
  else if (id == "run.T") c.T = to_double(kv);
  else if (id == "run.output_times") c.output_times = to_list(kv);
  else if (id == "run.out_dir") c.out_dir = kv.value;
  else if (id == "run.format") c.format = kv.value;
  else if (id == "solver.n_times") c.solver.n_times = to_int(kv);
  else if (id == "solver.time_ratio") c.solver.time_ratio = to_double(kv);
  else if (id == "solver.n1") c.solver.n1 = to_int(kv);
  else if (id == "solver.n2") c.solver.n2 = to_int(kv);
  else if (id == "solver.quad_z1") c.solver.quad_z1 = to_int(kv);
  else if (id == "solver.ms") c.solver.ms = to_int(kv);
  else if (id == "solver.graded_p") c.solver.graded_p = to_double(kv);
  else if (id == "solver.tol") c.solver.tol = to_double(kv);
  else if (id == "solver.max_iters") c.solver.max_iters = to_int(kv);
  else if (id == "solver.refine_cells") c.solver.refine_cells = to_int(kv);
  else if (id == "solver.refine_ratio") c.solver.refine_ratio = to_double(kv);
  else if (id == "solver.refine_floor") c.solver.refine_floor = to_double(kv);
  else if (id == "fv.nx1") c.fv.nx1 = to_int(kv);
  else if (id == "fv.nx2") c.fv.nx2 = to_int(kv);
  else if (id == "fv.L") c.fv.L = to_double(kv);
  else if (id == "fv.cfl") c.fv.cfl = to_double(kv);
  else if (id == "reconstruct.nx1") c.recon_nx1 = to_int(kv);
  else if (id == "reconstruct.nx2") c.recon_nx2 = to_int(kv);
  else if (id == "reconstruct.L") c.recon_L = to_double(kv);
  else if (id == "jko.h") c.jko_h = to_double(kv);
  else if (id == "jko.cells") c.jko_cells = to_int(kv);
  else if (id == "jko.steps") c.jko_steps = to_int(kv);
  else if (id == "jko.L") c.jko_L = to_double(kv);
  else if (id == "compare.tol") c.compare_tol = to_double(kv);
  else
    throw validation_error("config line " + std::to_string(kv.line) + ": unknown field '" +
                           id + "'");
}

}  // namespace

AnalyticGraph RunConfig::graph() const {
  if (preset == "flat") return AnalyticGraph::flat();
  if (preset == "cos") return AnalyticGraph::cosine(amplitude, wavenumber);
  if (preset == "coeffs") return AnalyticGraph::from_coeffs(coeffs);
  throw validation_error("interface.preset must be flat, cos or coeffs");
}

double RunConfig::reconstruction_height() const {
  if (recon_L > 0.0) return recon_L;
  AnalyticGraph g = graph();
  double m = 0.0;
  for (int i = 0; i < 1024; ++i) m = std::max(m, std::abs(g.series.eval(kTwoPi * i / 1024, 0)));
  return std::max(4.0, 2.0 * m + 2.0 * T + 1.0);
}

void RunConfig::validate() {
  if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("alpha out of (0,1)");
  if (!(mu > 0.0 && mu <= 1.0)) throw validation_error("mu out of (0,1]");
  if (!(T > 0.0)) throw validation_error("T must be positive");
  if (format != "csv" && format != "json")
    throw validation_error("run.format must be csv or json");
  graph();  // validates coefficient symmetry
  solver.alpha = alpha;
  solver.T = T;
  solver.validate();
  fv.mu = mu;
  fv.validate();
  if (output_times.empty()) output_times = {T};
  for (double t : output_times)
    if (t < 0.0 || t > T) throw validation_error("output_times must lie in [0, T]");
  if (jko_cells < 8) throw validation_error("jko.cells must be >= 8");
  if (jko_h <= 0.0) throw validation_error("jko.h must be positive");
  if (jko_steps < 1) throw validation_error("jko.steps must be >= 1");
  if (jko_L <= 0.0) throw validation_error("jko.L must be positive");
  if (recon_nx1 < 8 || recon_nx2 < 9) throw validation_error("reconstruct grid too small");
  if (!(compare_tol > 0.0)) throw validation_error("compare.tol must be positive");
  hash = fnv1a64(canonical_config(*this));
}

RunConfig parse_config(std::istream& is, const std::vector<std::string>& overrides) {
  RunConfig c;
  for (const KeyVal& kv : tokenize(is)) apply(c, kv);
  int oline = 0;
  for (const std::string& ov : overrides) {
    ++oline;
    size_t eq = ov.find('=');
    size_t dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw validation_error("override '" + ov + "': expected section.key=value");
    KeyVal kv{ov.substr(0, dot), ov.substr(dot + 1, eq - dot - 1), trim(ov.substr(eq + 1)),
              -oline};
    apply(c, kv);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw missing_artifact_error("config file not found: " + path);
  return parse_config(is, overrides);
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "alpha=" << c.alpha << ";amplitude=" << c.amplitude << ";compare_tol=" << c.compare_tol
     << ";coeffs=";
  for (const auto& [k, v] : c.coeffs) os << k << ":" << v.real() << ":" << v.imag() << ",";
  os << ";format=" << c.format << ";fv=" << c.fv.nx1 << "," << c.fv.nx2 << "," << c.fv.L << ","
     << c.fv.cfl << "," << c.fv.mu << ";jko=" << c.jko_h << "," << c.jko_cells << ","
     << c.jko_steps << "," << c.jko_L << ";mu=" << c.mu << ";out_dir=" << c.out_dir
     << ";output_times=";
  for (double t : c.output_times) os << t << ",";
  os << ";preset=" << c.preset << ";recon=" << c.recon_nx1 << "," << c.recon_nx2 << ","
     << c.recon_L << ";solver=" << c.solver.n_times << "," << c.solver.time_ratio << ","
     << c.solver.n1 << "," << c.solver.n2 << "," << c.solver.quad_z1 << "," << c.solver.ms
     << "," << c.solver.graded_p << "," << c.solver.tol << "," << c.solver.max_iters << ","
     << c.solver.refine_cells << "," << c.solver.refine_ratio << "," << c.solver.refine_floor
     << ";T=" << c.T << ";wavenumber=" << c.wavenumber;
  return os.str();
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace mipm
