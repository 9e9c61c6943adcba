#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tdbem/assembly.hpp"
#include "tdbem/solver.hpp"

namespace tdbem {

/// Full description of one experiment run, readable from a flat key-value
/// config file with section headers.
struct RunConfig {
  // [geometry]
  std::string geometry = "sphere";  // sphere | icosahedron | screen
  int refine = 0;                   // subdivision levels (sphere/icosahedron)
  int screen_n = 12;                // grid count (screen)

  // [time]
  double dt = 0.1;
  double t_final = 2.5;
  int temporal_degree = 1;

  // [rhs]
  std::string rhs_preset = "example1";
  std::optional<Eigen::Vector3d> k_f_override;

  // [solver]
  double tolerance = 1e-7;
  int max_iterations = 400;
  std::vector<std::string> solvers = {"gmres", "pgmres", "standalone"};

  // [quadrature]
  QuadratureConfig quad;

  // [enrichment]
  int enrichment_count = 0;              // 0 disables the partition-of-unity basis
  std::optional<double> wave_number;     // defaults to |k_f|
  std::vector<Eigen::Vector3d> enrichment_vectors;  // explicit list overrides the default family
  std::vector<double> enrichment_phases;

  // [pressure] optional snapshot
  std::vector<Eigen::Vector3d> pressure_points;
  std::vector<double> pressure_times;

  // [output]
  std::string output_dir = "run_output";
  bool band_cache = true;
  std::string cache_dir = "band_cache";
  std::string density_error = "auto";  // auto | true | false
  int threads = 1;
  bool dry_run = false;

  void validate() const;
};

/// Parses the config file; errors carry file/line/field diagnostics.
RunConfig parse_run_config(const std::string& path);

/// Round-trip used by summary.json to echo every field actually used.
std::string config_to_string(const RunConfig& cfg);

}  // namespace tdbem
