#include "mipm/field_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mipm {

namespace {

FILE* open_w(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_r(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw missing_artifact_error("cannot open: " + path);
  return is;
}

}  // namespace

void save_field_csv(const GridField& f, const std::string& path,
                    const std::vector<std::string>& columns, std::uint64_t config_hash) {
  if (static_cast<int>(columns.size()) != f.ncomp)
    throw std::invalid_argument("save_field_csv: column count mismatch");
  FILE* out = open_w(path);
  std::fprintf(out, "# mipm-field\n");
  std::fprintf(out, "# config_hash = %016" PRIx64 "\n", config_hash);
  std::fprintf(out, "# time = %.17g\n# L = %.17g\n# nx1 = %d\n# nx2 = %d\n# ncomp = %d\n",
               f.time, f.L, f.nx1, f.nx2, f.ncomp);
  std::fprintf(out, "# cell_centered = %d\n", f.cell_centered ? 1 : 0);
  std::fprintf(out, "x1,x2");
  for (const auto& c : columns) std::fprintf(out, ",%s", c.c_str());
  std::fprintf(out, "\n");
  for (int j = 0; j < f.nx2; ++j)
    for (int i = 0; i < f.nx1; ++i) {
      std::fprintf(out, "%.17g,%.17g", f.x1(i), f.x2(j));
      for (int c = 0; c < f.ncomp; ++c) std::fprintf(out, ",%.17g", f.at(c, i, j));
      std::fprintf(out, "\n");
    }
  std::fclose(out);
}

namespace {

std::map<std::string, std::string> read_header(std::istream& is, std::string& colrow) {
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      size_t eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        std::string val = line.substr(eq + 1);
        auto strip = [](std::string s) {
          size_t a = s.find_first_not_of(" \t");
          size_t b = s.find_last_not_of(" \t\r");
          return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        meta[strip(key)] = strip(val);
      }
      continue;
    }
    colrow = line;
    break;
  }
  return meta;
}

}  // namespace

GridField load_field_csv(const std::string& path) {
  std::ifstream is = open_r(path);
  std::string cols;
  auto meta = read_header(is, cols);
  GridField f(std::stoi(meta.at("nx1")), std::stoi(meta.at("nx2")), std::stod(meta.at("L")),
              std::stod(meta.at("time")), std::stoi(meta.at("ncomp")),
              meta.at("cell_centered") == "1");
  std::string line;
  for (int j = 0; j < f.nx2; ++j)
    for (int i = 0; i < f.nx1; ++i) {
      if (!std::getline(is, line)) throw std::runtime_error(path + ": truncated field file");
      std::istringstream ls(line);
      std::string tok;
      std::getline(ls, tok, ',');  // x1
      std::getline(ls, tok, ',');  // x2
      for (int c = 0; c < f.ncomp; ++c) {
        if (!std::getline(ls, tok, ',')) throw std::runtime_error(path + ": short row");
        f.at(c, i, j) = std::stod(tok);
      }
    }
  return f;
}

void save_field_json(const GridField& f, const std::string& path,
                     const std::vector<std::string>& columns, std::uint64_t config_hash) {
  nlohmann::json j;
  j["kind"] = "mipm-field";
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, config_hash);
  j["config_hash"] = buf;
  j["time"] = f.time;
  j["L"] = f.L;
  j["nx1"] = f.nx1;
  j["nx2"] = f.nx2;
  j["ncomp"] = f.ncomp;
  j["cell_centered"] = f.cell_centered;
  j["columns"] = columns;
  j["data"] = f.v;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump();
}

GridField load_field_json(const std::string& path) {
  std::ifstream is = open_r(path);
  nlohmann::json j;
  is >> j;
  GridField f(j.at("nx1").get<int>(), j.at("nx2").get<int>(), j.at("L").get<double>(),
              j.at("time").get<double>(), j.at("ncomp").get<int>(),
              j.at("cell_centered").get<bool>());
  f.v = j.at("data").get<std::vector<double>>();
  if (f.v.size() != static_cast<size_t>(f.nx1) * f.nx2 * f.ncomp)
    throw std::runtime_error(path + ": data size mismatch");
  return f;
}

void save_field(const GridField& f, const std::string& path, const std::string& format,
                const std::vector<std::string>& columns, std::uint64_t config_hash) {
  if (format == "json")
    save_field_json(f, path, columns, config_hash);
  else
    save_field_csv(f, path, columns, config_hash);
}

GridField load_field(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") return load_field_json(path);
  return load_field_csv(path);
}

void save_curves_csv(const LevelCurveSet& cs, const std::string& path,
                     std::uint64_t config_hash) {
  FILE* out = open_w(path);
  std::fprintf(out, "# mipm-curves\n# config_hash = %016" PRIx64 "\n# time = %.17g\n",
               config_hash, cs.time);
  std::fprintf(out, "x1,h,gamma\n");
  for (size_t ih = 0; ih < cs.h.size(); ++ih)
    for (size_t i = 0; i < cs.x1.size(); ++i)
      std::fprintf(out, "%.17g,%.17g,%.17g\n", cs.x1[i], cs.h[ih], cs.vals[ih][i]);
  std::fclose(out);
}

void save_records_text(const std::vector<DiagnosticsRecord>& recs, const std::string& path,
                       std::uint64_t config_hash) {
  FILE* out = open_w(path);
  std::fprintf(out, "# mipm-diagnostics\n# config_hash = %016" PRIx64 "\n", config_hash);
  for (const auto& r : recs) {
    std::fprintf(out, "record:\n");
    std::fprintf(out, "  time: %.17g\n  mass_error: %.17g\n  e_rel: %.17g\n", r.time,
                 r.mass_error, r.e_rel);
    std::fprintf(out, "  dissipation_lhs: %.17g\n  dissipation_rhs: %.17g\n", r.dissipation_lhs,
                 r.dissipation_rhs);
    std::fprintf(out, "  hull_violation_max: %.17g\n", r.hull_violation_max);
    for (const auto& [name, val] : r.entropy_residual)
      std::fprintf(out, "  entropy_residual[%s]: %.17g\n", name.c_str(), val);
  }
  std::fclose(out);
}

void save_records_csv(const std::vector<DiagnosticsRecord>& recs, const std::string& path,
                      std::uint64_t config_hash) {
  FILE* out = open_w(path);
  std::fprintf(out, "# mipm-diagnostics\n# config_hash = %016" PRIx64 "\n", config_hash);
  std::fprintf(out, "time,mass_error,e_rel,dissipation_lhs,dissipation_rhs,hull_violation_max");
  if (!recs.empty())
    for (const auto& [name, val] : recs.back().entropy_residual)
      std::fprintf(out, ",res_%s", name.c_str());
  std::fprintf(out, "\n");
  for (const auto& r : recs) {
    std::fprintf(out, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.time, r.mass_error, r.e_rel,
                 r.dissipation_lhs, r.dissipation_rhs, r.hull_violation_max);
    if (!recs.empty())
      for (const auto& [name, val] : recs.back().entropy_residual) {
        auto it = r.entropy_residual.find(name);
        std::fprintf(out, ",%.17g", it == r.entropy_residual.end() ? 0.0 : it->second);
      }
    std::fprintf(out, "\n");
  }
  std::fclose(out);
}

void save_jko_trajectory_csv(const JkoRun& run, double h, const std::string& path,
                             std::uint64_t config_hash) {
  FILE* out = open_w(path);
  std::fprintf(out, "# mipm-jko-trajectory\n# config_hash = %016" PRIx64 "\n# h = %.17g\n",
               config_hash, h);
  std::fprintf(out, "step,t,y,theta\n");
  for (size_t k = 0; k < run.states.size(); ++k) {
    const Theta1D& s = run.states[k];
    for (int i = 0; i < s.n(); ++i)
      std::fprintf(out, "%zu,%.17g,%.17g,%.17g\n", k, k * h, s.y(i), s.theta[i]);
  }
  std::fclose(out);
}

void save_jko_reports_csv(const JkoRun& run, const std::string& path,
                          std::uint64_t config_hash) {
  FILE* out = open_w(path);
  std::fprintf(out, "# mipm-jko-reports\n# config_hash = %016" PRIx64 "\n", config_hash);
  std::fprintf(out, "step,h,objective,inner_iterations,converged,el_residual\n");
  for (size_t k = 0; k < run.reports.size(); ++k) {
    const JkoStepReport& r = run.reports[k];
    std::fprintf(out, "%zu,%.17g,%.17g,%d,%d,%.17g\n", k + 1, r.h, r.objective,
                 r.inner_iterations, r.converged ? 1 : 0, r.el_residual);
  }
  std::fclose(out);
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path,
                   std::uint64_t config_hash) {
  FILE* out = open_w(path);
  std::fprintf(out, "# mipm-manifest\n# config_hash = %016" PRIx64 "\n", config_hash);
  for (const auto& e : entries)
    std::fprintf(out, "%.17g %s %s %s\n", e.time, e.rho.c_str(), e.vel.c_str(), e.flux.c_str());
  std::fclose(out);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream is = open_r(path);
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.time >> e.rho >> e.vel >> e.flux))
      throw std::runtime_error(path + ": bad manifest line '" + line + "'");
    out.push_back(e);
  }
  return out;
}

}  // namespace mipm
