#include "tdbem/system.hpp"

#include <sstream>
#include <stdexcept>

namespace tdbem {

Eigen::VectorXd SpaceTimeSystem::rhs_flat() const {
  return Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
}

void SpaceTimeSystem::validate() const {
  if (n_dof <= 0 || n_steps <= 0) throw std::invalid_argument("SpaceTimeSystem: empty system");
  if (bands.size() < 2) throw std::invalid_argument("SpaceTimeSystem: needs bands k = -1, 0");
  for (const auto& b : bands)
    if (b.rows() != n_dof || b.cols() != n_dof)
      throw std::invalid_argument("SpaceTimeSystem: band dimension mismatch");
  if (rhs.rows() != n_dof || rhs.cols() != n_steps)
    throw std::invalid_argument("SpaceTimeSystem: rhs dimension mismatch");
}

Eigen::VectorXd matvec(const SpaceTimeSystem& sys, const Eigen::VectorXd& c) {
  if (c.size() != sys.total_dim()) throw std::invalid_argument("matvec: dimension mismatch");
  const int D = sys.n_dof, N = sys.n_steps;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(c.size());
  Eigen::Map<const Eigen::MatrixXd> C(c.data(), D, N);
  Eigen::Map<Eigen::MatrixXd> Y(y.data(), D, N);
  // one block-matrix product per band (Toeplitz structure)
  for (int k = -1; k <= sys.n_bands_max(); ++k) {
    int n_lo = std::max(1, 1 + k);
    int n_hi = (k >= 0) ? N : N - 1;
    if (n_lo > n_hi) continue;
    int len = n_hi - n_lo + 1;
    Y.middleCols(n_lo - 1, len).noalias() +=
        sys.band(k) * C.middleCols(n_lo - k - 1, len);
  }
  return y;
}

Eigen::VectorXd triangular_matvec(const SpaceTimeSystem& sys, const TriangularSystem& tri,
                                  const Eigen::VectorXd& c) {
  if (c.size() != sys.total_dim())
    throw std::invalid_argument("triangular_matvec: dimension mismatch");
  const int D = sys.n_dof, N = sys.n_steps;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(c.size());
  Eigen::Map<const Eigen::MatrixXd> C(c.data(), D, N);
  Eigen::Map<Eigen::MatrixXd> Y(y.data(), D, N);
  for (int k = 0; k <= tri.n_bands_max(); ++k) {
    int n_lo = 1 + k;
    if (n_lo > N) continue;
    int len = N - n_lo + 1;
    Y.middleCols(n_lo - 1, len).noalias() += tri.band(k) * C.middleCols(n_lo - k - 1, len);
  }
  return y;
}

TriangularSystem build_preconditioner(const SpaceTimeSystem& sys) {
  sys.validate();
  TriangularSystem tri;
  tri.n_dof = sys.n_dof;
  const int K = std::max(sys.n_bands_max(), 1);
  tri.bands.resize(K + 1);
  tri.bands[0] = sys.band(0) + 2.0 * sys.band(-1);
  tri.bands[1] = ((sys.n_bands_max() >= 1) ? sys.band(1) : Eigen::MatrixXd::Zero(sys.n_dof, sys.n_dof)) -
                 sys.band(-1);
  for (int k = 2; k <= sys.n_bands_max(); ++k) tri.bands[k] = sys.band(k);

  tri.lu0.compute(tri.bands[0]);
  const Eigen::MatrixXd& U = tri.lu0.matrixLU();
  double min_pivot = 1e300, max_pivot = 0.0;
  for (int i = 0; i < U.rows(); ++i) {
    double p = std::abs(U(i, i));
    min_pivot = std::min(min_pivot, p);
    max_pivot = std::max(max_pivot, p);
  }
  if (min_pivot <= 0.0 || (max_pivot > 0.0 && min_pivot / max_pivot < 1e-17)) {
    std::ostringstream msg;
    msg << "build_preconditioner: diagonal band singular (min |pivot| = " << min_pivot
        << ", max |pivot| = " << max_pivot << ")";
    throw std::runtime_error(msg.str());
  }
  return tri;
}

Eigen::VectorXd forward_substitute(const TriangularSystem& tri, const Eigen::VectorXd& rhs_flat,
                                   int n_steps) {
  const int D = tri.n_dof;
  if (rhs_flat.size() != static_cast<long>(n_steps) * D)
    throw std::invalid_argument("forward_substitute: dimension mismatch");
  Eigen::VectorXd g = rhs_flat;  // running right-hand side
  Eigen::VectorXd c(rhs_flat.size());
  Eigen::Map<Eigen::MatrixXd> G(g.data(), D, n_steps);
  Eigen::Map<Eigen::MatrixXd> C(c.data(), D, n_steps);
  const int K = tri.n_bands_max();
  const int chunk = 32;

  for (int j0 = 1; j0 <= n_steps; j0 += chunk) {
    int j1 = std::min(n_steps, j0 + chunk - 1);
    // within the chunk: sequential solves with chunk-local history
    for (int j = j0; j <= j1; ++j) {
      Eigen::VectorXd rhs_j = G.col(j - 1);
      for (int k = 1; k <= std::min(j - j0, K); ++k)
        rhs_j.noalias() -= tri.band(k) * C.col(j - k - 1);
      C.col(j - 1) = tri.lu0.solve(rhs_j);
    }
    // push the chunk's contribution to the remaining right-hand sides
    for (int k = 1; k <= K; ++k) {
      int n_lo = std::max(j1 + 1, j0 + k);
      int n_hi = std::min(n_steps, j1 + k);
      if (n_lo > n_hi) continue;
      int len = n_hi - n_lo + 1;
      G.middleCols(n_lo - 1, len).noalias() -= tri.band(k) * C.middleCols(n_lo - k - 1, len);
    }
  }
  return c;
}

double energy(const SpaceTimeSystem& sys, const Eigen::VectorXd& c) {
  if (c.size() != sys.total_dim()) throw std::invalid_argument("energy: dimension mismatch");
  Eigen::VectorXd vc = matvec(sys, c);
  return 0.5 * c.dot(vc) - sys.rhs_flat().dot(c);
}

Eigen::MatrixXd to_dense(const SpaceTimeSystem& sys) {
  const int D = sys.n_dof, N = sys.n_steps;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<long>(N) * D, static_cast<long>(N) * D);
  for (int n = 1; n <= N; ++n)
    for (int m = 1; m <= N; ++m) {
      int k = n - m;
      if (k < -1 || k > sys.n_bands_max()) continue;
      A.block((n - 1) * D, (m - 1) * D, D, D) = sys.band(k);
    }
  return A;
}

Eigen::MatrixXd to_dense_triangular(const SpaceTimeSystem& sys, const TriangularSystem& tri) {
  const int D = sys.n_dof, N = sys.n_steps;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<long>(N) * D, static_cast<long>(N) * D);
  for (int n = 1; n <= N; ++n)
    for (int m = 1; m <= n; ++m) {
      int k = n - m;
      if (k > tri.n_bands_max()) continue;
      A.block((n - 1) * D, (m - 1) * D, D, D) = tri.band(k);
    }
  return A;
}

}  // namespace tdbem
