#pragma once

#include <map>
#include <string>
#include <vector>

#include "tdbem/run_config.hpp"
#include "tdbem/solver.hpp"
#include "tdbem/system.hpp"

namespace tdbem {

struct RunResult {
  std::string output_dir;
  int n_dof_space = 0;      // spatial DOF (including enrichment blocks)
  int n_steps = 0;
  int n_bands = 0;
  long total_dof = 0;
  double h_max = 0.0;
  double diameter = 0.0;
  double cfl = 0.0;
  bool dry_run = false;
  bool cache_hit = false;
  double assembly_seconds = 0.0;
  std::map<std::string, SolveReport> reports;    // keyed by solver mode
  double l2_error = -1.0;                        // relative density error, when computed
  double l2_error_abs = -1.0;
};

/// Builds the system described by the config (possibly from the band cache).
SpaceTimeSystem build_system(const RunConfig& cfg, bool* cache_hit = nullptr,
                             double* assembly_seconds = nullptr);

/// Runs one experiment end to end and writes summary.json, residuals CSVs
/// and optional error/pressure snapshots into cfg.output_dir.
RunResult run_example(const RunConfig& cfg);

/// Runs the config once per axis value (axis: refinement | dt | enrichments)
/// and writes one aggregated CSV row per run into <output_dir>/sweep.csv.
/// Individual failures are recorded in the row; the sweep continues.
std::string sweep(const RunConfig& base, const std::string& axis,
                  const std::vector<double>& values);

}  // namespace tdbem
