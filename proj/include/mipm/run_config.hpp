#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mipm/analytic_graph.hpp"
#include "mipm/fv.hpp"
#include "mipm/levelset.hpp"

namespace mipm {

/// Declarative run configuration (structured text, key = value with sections).
struct RunConfig {
  // [interface]
  std::string preset = "flat";  // flat | cos | coeffs
  double amplitude = 0.1;
  int wavenumber = 1;
  std::vector<std::pair<int, cd>> coeffs;

  // [run]
  double alpha = 0.5;
  double mu = 1.0;
  double T = 0.05;
  std::vector<double> output_times;
  std::string out_dir = "out";
  std::string format = "csv";  // csv | json

  // [solver] grid/iteration knobs (alpha and T are mirrored in on load)
  SolverConfig solver;

  // [fv]
  FVConfig fv;

  // [reconstruct]
  int recon_nx1 = 256;
  int recon_nx2 = 257;
  double recon_L = 0.0;  // 0 = auto: max(4, 2 max|gamma0| + 2T + 1)

  // [jko]
  double jko_h = 0.01;
  int jko_cells = 128;
  int jko_steps = 50;
  double jko_L = 3.0;

  // [compare]
  double compare_tol = 0.05;  // L1 gap allowance as a fraction of the mixing area

  std::uint64_t hash = 0;  // FNV-1a of the canonical serialization

  AnalyticGraph graph() const;
  double reconstruction_height() const;  // recon_L, resolving the auto default
  void validate();                       // fills derived fields, computes hash
};

/// Parses and validates; throws validation_error with line information.
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});
RunConfig parse_config(std::istream& is, const std::vector<std::string>& overrides = {});

std::string canonical_config(const RunConfig& c);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace mipm
