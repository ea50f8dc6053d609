#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mipm/diagnostics.hpp"
#include "mipm/field_io.hpp"
#include "mipm/fv.hpp"
#include "mipm/jko.hpp"
#include "mipm/reconstruction.hpp"
#include "mipm/run_config.hpp"

namespace fs = std::filesystem;
using namespace mipm;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitMissing = 4;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string field_name(const std::string& kind, size_t idx, const std::string& format) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_t%02zu.%s", kind.c_str(), idx,
                format == "json" ? "json" : "csv");
  return buf;
}

std::vector<std::string> columns_for(const std::string& kind) {
  if (kind == "rho") return {"rho"};
  if (kind == "vel") return {"v1", "v2"};
  return {"m1", "m2"};
}

int cmd_solve(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  try {
    LevelSetRun run = solve_levelset(cfg.graph(), cfg.solver);
    {
      std::ofstream os(join(cfg.out_dir, "eta_checkpoint.txt"));
      os << "# config_hash = " << std::hex << cfg.hash << std::dec << "\n";
      save_checkpoint(run, os);
    }
    {
      std::ofstream os(join(cfg.out_dir, "convergence_report.txt"));
      os << "# config_hash = " << std::hex << cfg.hash << std::dec << "\n";
      save_report(run.report, os);
    }
    std::printf("solve-levelset: converged in %d iterations, residual %.3e\n",
                run.report.iterations, run.report.final_residual);
    return 0;
  } catch (const solver_failure& e) {
    std::ofstream os(join(cfg.out_dir, "convergence_report.txt"));
    os << "# config_hash = " << std::hex << cfg.hash << std::dec << "\n";
    save_report(e.report, os);
    std::fprintf(stderr, "solve-levelset failed: %s\n", e.what());
    return kExitDivergence;
  }
}

LevelSetSolution load_solution(const RunConfig& cfg) {
  std::string path = join(cfg.out_dir, "eta_checkpoint.txt");
  std::ifstream is(path);
  if (!is) throw missing_artifact_error("missing checkpoint (run solve-levelset first): " + path);
  std::string hash_line;
  std::getline(is, hash_line);  // config hash comment
  return LevelSetSolution(load_checkpoint(is));
}

int cmd_reconstruct(const RunConfig& cfg) {
  LevelSetSolution sol = load_solution(cfg);
  double L = cfg.reconstruction_height();
  std::vector<ManifestEntry> manifest;
  std::vector<double> hs = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (size_t k = 0; k < cfg.output_times.size(); ++k) {
    double t = cfg.output_times[k];
    if (t <= 0.0) throw validation_error("reconstruct: output times must be positive");
    GridField rho = sol.sample_density(t, cfg.recon_nx1, cfg.recon_nx2, L);
    GridField vel = sol.sample_velocity(t, cfg.recon_nx1, cfg.recon_nx2, L);
    GridField flux = LevelSetSolution::assemble_flux(rho, vel, cfg.mu);
    ManifestEntry e;
    e.time = t;
    e.rho = field_name("rho", k, cfg.format);
    e.vel = field_name("vel", k, cfg.format);
    e.flux = field_name("flux", k, cfg.format);
    save_field(rho, join(cfg.out_dir, e.rho), cfg.format, columns_for("rho"), cfg.hash);
    save_field(vel, join(cfg.out_dir, e.vel), cfg.format, columns_for("vel"), cfg.hash);
    save_field(flux, join(cfg.out_dir, e.flux), cfg.format, columns_for("flux"), cfg.hash);
    manifest.push_back(e);

    LevelCurveSet cs;
    cs.time = t;
    cs.h = hs;
    for (int i = 0; i < cfg.recon_nx1; ++i) cs.x1.push_back(kTwoPi * i / cfg.recon_nx1);
    for (double h : hs) cs.vals.push_back(sol.level_curve(t, h, cfg.recon_nx1));
    char buf[64];
    std::snprintf(buf, sizeof buf, "curves_t%02zu.csv", k);
    save_curves_csv(cs, join(cfg.out_dir, buf), cfg.hash);
  }
  save_manifest(manifest, join(cfg.out_dir, "levelset_manifest.txt"), cfg.hash);
  std::printf("reconstruct: wrote %zu time slices to %s\n", manifest.size(), cfg.out_dir.c_str());
  return 0;
}

int cmd_fv(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::vector<double> kc = {-0.5, 0.0, 0.5};
  FVRun run = fv_run(cfg.graph(), cfg.fv, cfg.output_times, kc);
  std::vector<ManifestEntry> manifest;
  for (size_t k = 0; k < cfg.output_times.size(); ++k) {
    ManifestEntry e;
    e.time = cfg.output_times[k];
    e.rho = field_name("fv_rho", k, cfg.format);
    e.vel = field_name("fv_vel", k, cfg.format);
    e.flux = field_name("fv_flux", k, cfg.format);
    save_field(run.rho[k], join(cfg.out_dir, e.rho), cfg.format, columns_for("rho"), cfg.hash);
    save_field(run.vel[k], join(cfg.out_dir, e.vel), cfg.format, columns_for("vel"), cfg.hash);
    save_field(run.flux[k], join(cfg.out_dir, e.flux), cfg.format, columns_for("flux"), cfg.hash);
    manifest.push_back(e);
  }
  save_manifest(manifest, join(cfg.out_dir, "fv_manifest.txt"), cfg.hash);
  FILE* out = std::fopen(join(cfg.out_dir, "fv_summary.txt").c_str(), "w");
  std::fprintf(out, "# config_hash = %016" PRIx64 "\n", cfg.hash);
  std::fprintf(out, "steps: %d\nmass0: %.17g\nmax_mass_drift: %.17g\n", run.steps, run.mass0,
               run.max_mass_drift);
  std::fprintf(out, "max_entropy_production: %.17g\nmin_rho: %.17g\nmax_rho: %.17g\n",
               run.max_entropy_production, run.min_rho, run.max_rho);
  std::fclose(out);
  std::printf("fv-run: %d steps, mass drift %.2e, entropy production %.2e\n", run.steps,
              run.max_mass_drift, run.max_entropy_production);
  return 0;
}

int cmd_jko(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Theta1D theta0 = Theta1D::step_data(cfg.jko_L, cfg.jko_cells);
  JkoRun run = run_jko(theta0, cfg.jko_h, cfg.jko_steps);
  save_jko_trajectory_csv(run, cfg.jko_h, join(cfg.out_dir, "jko_trajectory.csv"), cfg.hash);
  save_jko_reports_csv(run, join(cfg.out_dir, "jko_reports.csv"), cfg.hash);
  double worst_el = 0.0;
  for (const auto& r : run.reports) worst_el = std::max(worst_el, r.el_residual);
  std::printf("jko-flat: %d steps, worst EL residual %.2e (h = %g)\n", cfg.jko_steps, worst_el,
              cfg.jko_h);
  return 0;
}

Rho0Sampler rho0_sampler(const RunConfig& cfg) {
  AnalyticGraph g = cfg.graph();
  return [g](double x1, double x2) { return x2 >= g.series.eval(x1, 0) ? 1.0 : -1.0; };
}

std::vector<GridField> load_fields(const std::vector<ManifestEntry>& m, int which,
                                   const std::string& dir) {
  std::vector<GridField> out;
  for (const auto& e : m)
    out.push_back(load_field(join(dir, which == 0 ? e.rho : which == 1 ? e.vel : e.flux)));
  return out;
}

int cmd_diagnose(const RunConfig& cfg, const std::string& source) {
  std::string mpath = join(cfg.out_dir,
                           source == "fv" ? "fv_manifest.txt" : "levelset_manifest.txt");
  auto manifest = load_manifest(mpath);
  if (manifest.size() < 3)
    throw validation_error("diagnose: need >= 3 output times for time derivatives");
  auto rho = load_fields(manifest, 0, cfg.out_dir);
  auto vel = load_fields(manifest, 1, cfg.out_dir);
  auto flux = load_fields(manifest, 2, cfg.out_dir);
  auto recs = diagnose_trajectory(rho, vel, flux, rho0_sampler(cfg), default_entropy_suite());
  save_records_text(recs, join(cfg.out_dir, "diagnostics_" + source + ".txt"), cfg.hash);
  save_records_csv(recs, join(cfg.out_dir, "diagnostics_" + source + ".csv"), cfg.hash);
  std::printf("diagnose(%s): %zu records\n", source.c_str(), recs.size());
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  auto ls = load_manifest(join(cfg.out_dir, "levelset_manifest.txt"));
  auto fv = load_manifest(join(cfg.out_dir, "fv_manifest.txt"));
  FILE* out = std::fopen(join(cfg.out_dir, "compare.csv").c_str(), "w");
  std::fprintf(out, "# mipm-compare\n# config_hash = %016" PRIx64 "\n", cfg.hash);
  std::fprintf(out, "t,l1_gap,linf_gap,mix_area,rel_gap\n");
  std::printf("%10s %12s %12s %12s %10s\n", "t", "L1 gap", "Linf gap", "mix area", "rel");
  bool ok = true;
  for (const auto& le : ls) {
    const ManifestEntry* fe = nullptr;
    for (const auto& f : fv)
      if (std::abs(f.time - le.time) < 1e-12) fe = &f;
    if (!fe) continue;
    GridField a = load_field(join(cfg.out_dir, le.rho));
    GridField b = load_field(join(cfg.out_dir, fe->rho));
    if (a.L != b.L)
      throw validation_error("compare: level-set and FV fields cover different strips");
    if (a.nx1 != b.nx1 || a.nx2 != b.nx2 || a.cell_centered != b.cell_centered)
      a = resample_to(a, b);  // node-sampled reconstruction onto the FV cells
    double l1 = 0.0, linf = 0.0, area = 0.0;
    for (int j = 0; j < a.nx2; ++j)
      for (int i = 0; i < a.nx1; ++i) {
        double d = std::abs(a.at(0, i, j) - b.at(0, i, j));
        l1 += d * a.dx1() * a.w2(j);
        linf = std::max(linf, d);
        if (std::abs(a.at(0, i, j)) < 1.0 - 1e-9) area += a.dx1() * a.w2(j);
      }
    double rel = area > 0.0 ? l1 / area : 0.0;
    std::fprintf(out, "%.17g,%.17g,%.17g,%.17g,%.17g\n", le.time, l1, linf, area, rel);
    std::printf("%10.4f %12.4e %12.4e %12.4e %9.2f%%\n", le.time, l1, linf, area, 100 * rel);
    if (rel > cfg.compare_tol) ok = false;
  }
  std::fclose(out);
  std::printf("compare: %s (tolerance %.1f%% of mixing-zone area)\n",
              ok ? "within tolerance" : "TOLERANCE EXCEEDED", 100 * cfg.compare_tol);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"macroscopic-IPM solver suite"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_override, diag_source = "levelset";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_override, "output directory (overrides config)");
  app.add_option("--override", overrides, "section.key=value (repeatable)");

  auto* solve = app.add_subcommand("solve-levelset", "run the fixed-point solver");
  auto* recon = app.add_subcommand("reconstruct", "sample rho, v, m from a checkpoint");
  auto* fv = app.add_subcommand("fv-run", "run the finite-volume scheme");
  auto* jko = app.add_subcommand("jko-flat", "run the 1-D minimizing-movements scheme");
  auto* diag = app.add_subcommand("diagnose", "diagnostics from exported fields");
  diag->add_option("--source", diag_source, "levelset | fv");
  auto* comp = app.add_subcommand("compare", "gap table between level-set and FV fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitValidation : 0;
  }

  try {
    RunConfig cfg = load_config(config_path, overrides);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (solve->parsed()) return cmd_solve(cfg);
    if (recon->parsed()) return cmd_reconstruct(cfg);
    if (fv->parsed()) return cmd_fv(cfg);
    if (jko->parsed()) return cmd_jko(cfg);
    if (diag->parsed()) return cmd_diagnose(cfg, diag_source);
    if (comp->parsed()) return cmd_compare(cfg);
  } catch (const missing_artifact_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitMissing;
  } catch (const validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const solver_failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
