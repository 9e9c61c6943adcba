#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tdbem {

/// Block-lower-Hessenberg block-Toeplitz space-time system V c = F.
/// bands[k+1] holds band V^k for k = -1 .. n_bands_max(); block (row n,
/// col m) of the full matrix equals V^{n-m}. Unknown blocks are the
/// coefficients at t = dt, ..., n_steps*dt; c_0 = 0 by the zero initial
/// condition.
struct SpaceTimeSystem {
  std::vector<Eigen::MatrixXd> bands;  // index 0 <-> k = -1
  int n_steps = 0;
  int n_dof = 0;
  Eigen::MatrixXd rhs;  // n_dof x n_steps, column n-1 = f_n

  int n_bands_max() const { return static_cast<int>(bands.size()) - 2; }
  const Eigen::MatrixXd& band(int k) const { return bands[k + 1]; }
  long total_dim() const { return static_cast<long>(n_steps) * n_dof; }
  Eigen::VectorXd rhs_flat() const;
  void validate() const;
};

/// Lower-triangular block-Toeplitz approximation: bands[0] = V^0 + 2 V^-1,
/// bands[1] = V^1 - V^-1, bands[k] = V^k for k >= 2, with a reusable
/// factorization of the diagonal band.
struct TriangularSystem {
  std::vector<Eigen::MatrixXd> bands;  // index k = 0 .. K
  Eigen::PartialPivLU<Eigen::MatrixXd> lu0;
  int n_dof = 0;

  int n_bands_max() const { return static_cast<int>(bands.size()) - 1; }
  const Eigen::MatrixXd& band(int k) const { return bands[k]; }
};

/// y = V c with block row n = sum_{k=-1}^{min(n-1, K)} V^k c_{n-k}.
Eigen::VectorXd matvec(const SpaceTimeSystem& sys, const Eigen::VectorXd& c);

/// y = Vtilde c (triangular bands only); used for residual checks.
Eigen::VectorXd triangular_matvec(const SpaceTimeSystem& sys, const TriangularSystem& tri,
                                  const Eigen::VectorXd& c);

TriangularSystem build_preconditioner(const SpaceTimeSystem& sys);

/// Solves Vtilde c = F by block forward substitution (the modified
/// marching-on-in-time scheme). F is flat of size n_steps * n_dof.
Eigen::VectorXd forward_substitute(const TriangularSystem& tri, const Eigen::VectorXd& rhs_flat,
                                   int n_steps);

/// E = 1/2 c^T V c - F^T c.
double energy(const SpaceTimeSystem& sys, const Eigen::VectorXd& c);

/// Dense block-Hessenberg matrix of the system; small instances only.
Eigen::MatrixXd to_dense(const SpaceTimeSystem& sys);
Eigen::MatrixXd to_dense_triangular(const SpaceTimeSystem& sys, const TriangularSystem& tri);

}  // namespace tdbem
