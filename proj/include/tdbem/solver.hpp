#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tdbem/system.hpp"

namespace tdbem {

enum class SolverMode { gmres, preconditioned_gmres, standalone };

struct SolverConfig {
  double tolerance = 1e-8;  // absolute threshold on the native residual indicator
  int max_iterations = 300;
  SolverMode mode = SolverMode::gmres;
  void validate() const;
};

struct SolveReport {
  Eigen::VectorXd solution;
  /// ||V c_i - F||_2 per iteration, starting at iteration 0.
  std::vector<double> residual_history_plain;
  /// ||Vtilde^{-1} (V c_i - F)||_2 per iteration; filled when a
  /// preconditioner is attached.
  std::vector<double> residual_history_prec;
  int iterations = 0;
  bool converged = false;
  bool hit_max_iterations = false;
  bool breakdown = false;
  double energy = 0.0;
  double wall_time_s = 0.0;

  double final_plain_residual() const {
    return residual_history_plain.empty() ? 0.0 : residual_history_plain.back();
  }
  double final_prec_residual() const {
    return residual_history_prec.empty() ? 0.0 : residual_history_prec.back();
  }
};

/// Full (non-restarted) GMRES with zero initial guess on V c = F. With a
/// preconditioner the left-preconditioned system Vtilde^{-1} V c =
/// Vtilde^{-1} F is solved and the stopping indicator is the
/// left-preconditioned residual; otherwise it is ||V c - F||_2. Both
/// indicators are recorded every iteration when available.
SolveReport gmres_solve(const SpaceTimeSystem& sys, const SolverConfig& cfg,
                        const TriangularSystem* precond = nullptr);

/// One application of the modified marching-on-in-time scheme:
/// c = Vtilde^{-1} F, reported with the plain residual of the full system.
SolveReport standalone_solve(const SpaceTimeSystem& sys, const TriangularSystem& precond);

}  // namespace tdbem
