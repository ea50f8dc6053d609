#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mipm/diagnostics.hpp"
#include "mipm/grid_field.hpp"
#include "mipm/jko.hpp"

namespace mipm {

/// CSV: header comments (# key = value) with grid metadata and the config
/// hash, a column-name row, then one "x1,x2,components..." row per sample at
/// 17 significant digits (exact numeric round trip).
void save_field_csv(const GridField& f, const std::string& path,
                    const std::vector<std::string>& columns, std::uint64_t config_hash);
GridField load_field_csv(const std::string& path);

/// JSON export with the same metadata; values round-trip exactly.
void save_field_json(const GridField& f, const std::string& path,
                     const std::vector<std::string>& columns, std::uint64_t config_hash);
GridField load_field_json(const std::string& path);

void save_field(const GridField& f, const std::string& path, const std::string& format,
                const std::vector<std::string>& columns, std::uint64_t config_hash);
GridField load_field(const std::string& path);

/// Level curves: rows x1, h, gamma.
void save_curves_csv(const LevelCurveSet& cs, const std::string& path,
                     std::uint64_t config_hash);

void save_records_text(const std::vector<DiagnosticsRecord>& recs, const std::string& path,
                       std::uint64_t config_hash);
void save_records_csv(const std::vector<DiagnosticsRecord>& recs, const std::string& path,
                      std::uint64_t config_hash);

void save_jko_trajectory_csv(const JkoRun& run, double h, const std::string& path,
                             std::uint64_t config_hash);
void save_jko_reports_csv(const JkoRun& run, const std::string& path,
                          std::uint64_t config_hash);

/// Trajectory manifest: one "time rho vel flux" line per output time.
struct ManifestEntry {
  double time;
  std::string rho, vel, flux;
};
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path,
                   std::uint64_t config_hash);
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace mipm
