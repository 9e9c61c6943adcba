#include <doctest.h>

#include <random>

#include "tdbem/system.hpp"

using namespace tdbem;

TEST_SUITE_BEGIN("system");

namespace {

// random banded system with a well-conditioned diagonal band
SpaceTimeSystem random_system(int n_dof, int n_steps, int n_bands, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpaceTimeSystem sys;
  sys.n_dof = n_dof;
  sys.n_steps = n_steps;
  sys.bands.resize(n_bands + 2);
  for (auto& b : sys.bands) {
    b.resize(n_dof, n_dof);
    for (int r = 0; r < n_dof; ++r)
      for (int c = 0; c < n_dof; ++c) b(r, c) = 0.3 * gauss(rng);
  }
  sys.bands[1] += 4.0 * Eigen::MatrixXd::Identity(n_dof, n_dof);  // V^0 dominant
  sys.rhs.resize(n_dof, n_steps);
  for (int r = 0; r < n_dof; ++r)
    for (int c = 0; c < n_steps; ++c) sys.rhs(r, c) = gauss(rng);
  return sys;
}

}  // namespace

TEST_CASE("matvec matches the dense block-Hessenberg matrix") {
  SpaceTimeSystem sys = random_system(4, 5, 2, 11);
  Eigen::MatrixXd A = to_dense(sys);
  std::mt19937 rng(4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd c(sys.total_dim());
    for (long i = 0; i < c.size(); ++i) c[i] = gauss(rng);
    Eigen::VectorXd via_bands = matvec(sys, c);
    Eigen::VectorXd dense = A * c;
    CHECK((via_bands - dense).norm() <= 1e-13 * dense.norm());
  }
}

TEST_CASE("matvec trivial cases") {
  SpaceTimeSystem sys = random_system(3, 4, 1, 2);
  CHECK(matvec(sys, Eigen::VectorXd::Zero(sys.total_dim())).norm() == 0.0);

  // identity V^0, zero elsewhere -> matvec is the identity
  for (auto& b : sys.bands) b.setZero();
  sys.bands[1] = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(sys.total_dim(), 0.0, 1.0);
  CHECK((matvec(sys, c) - c).norm() == 0.0);

  CHECK_THROWS_AS(matvec(sys, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("preconditioner band identities hold exactly") {
  SpaceTimeSystem sys = random_system(6, 8, 3, 21);
  TriangularSystem tri = build_preconditioner(sys);
  CHECK((tri.band(0) - (sys.band(0) + 2.0 * sys.band(-1))).cwiseAbs().maxCoeff() == 0.0);
  CHECK((tri.band(1) - (sys.band(1) - sys.band(-1))).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 2; k <= sys.n_bands_max(); ++k)
    CHECK((tri.band(k) - sys.band(k)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("preconditioner reduces to the plain system when V^-1 = 0") {
  SpaceTimeSystem sys = random_system(5, 6, 2, 31);
  sys.bands[0].setZero();  // q = 0 test functions
  TriangularSystem tri = build_preconditioner(sys);
  CHECK((tri.band(0) - sys.band(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((tri.band(1) - sys.band(1)).cwiseAbs().maxCoeff() == 0.0);

  // forward substitution then solves V c = F exactly
  Eigen::VectorXd c = forward_substitute(tri, sys.rhs_flat(), sys.n_steps);
  Eigen::MatrixXd A = to_dense(sys);
  Eigen::VectorXd dense = A.partialPivLu().solve(sys.rhs_flat());
  CHECK((c - dense).norm() <= 1e-11 * dense.norm());
}

TEST_CASE("singular diagonal band is reported with pivot diagnostics") {
  SpaceTimeSystem sys = random_system(4, 3, 1, 41);
  sys.bands[1].setZero();
  sys.bands[0].setZero();  // Vtilde^0 = 0
  CHECK_THROWS_WITH_AS(build_preconditioner(sys),
                       doctest::Contains("pivot"), std::runtime_error);
}

TEST_CASE("forward substitution solves the triangular system") {
  SpaceTimeSystem sys = random_system(5, 40, 6, 55);
  TriangularSystem tri = build_preconditioner(sys);
  Eigen::VectorXd c = forward_substitute(tri, sys.rhs_flat(), sys.n_steps);
  // residual of the triangular solve
  Eigen::VectorXd back = triangular_matvec(sys, tri, c);
  CHECK((back - sys.rhs_flat()).norm() <= 1e-10 * sys.rhs_flat().norm());

  // against the dense triangular matrix
  Eigen::MatrixXd T = to_dense_triangular(sys, tri);
  Eigen::VectorXd dense = T.partialPivLu().solve(sys.rhs_flat());
  CHECK((c - dense).norm() <= 1e-10 * dense.norm());
}

TEST_CASE("forward substitution scalar closed form") {
  // n_dof = 1, N_t = 2: c_1 = f_1/v0t, c_2 = (f_2 - v1t c_1)/v0t
  SpaceTimeSystem sys;
  sys.n_dof = 1;
  sys.n_steps = 2;
  sys.bands = {Eigen::MatrixXd::Constant(1, 1, 0.5),   // V^-1
               Eigen::MatrixXd::Constant(1, 1, 2.0),   // V^0
               Eigen::MatrixXd::Constant(1, 1, -1.0)}; // V^1
  sys.rhs.resize(1, 2);
  sys.rhs << 3.0, 1.0;
  TriangularSystem tri = build_preconditioner(sys);
  double v0t = 2.0 + 2.0 * 0.5, v1t = -1.0 - 0.5;
  double c1 = 3.0 / v0t;
  double c2 = (1.0 - v1t * c1) / v0t;
  Eigen::VectorXd c = forward_substitute(tri, sys.rhs_flat(), sys.n_steps);
  CHECK(c[0] == doctest::Approx(c1).epsilon(1e-15));
  CHECK(c[1] == doctest::Approx(c2).epsilon(1e-15));
  CHECK(forward_substitute(tri, Eigen::VectorXd::Zero(2), 2).norm() == 0.0);
}

TEST_CASE("extrapolation exactness for linear-in-time coefficients") {
  SpaceTimeSystem sys = random_system(7, 10, 5, 77);
  TriangularSystem tri = build_preconditioner(sys);
  std::mt19937 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd base(sys.n_dof);
    for (int i = 0; i < sys.n_dof; ++i) base[i] = gauss(rng);
    Eigen::VectorXd c(sys.total_dim());
    for (int m = 1; m <= sys.n_steps; ++m) c.segment((m - 1) * sys.n_dof, sys.n_dof) = m * base;
    Eigen::VectorXd vc = matvec(sys, c);
    Eigen::VectorXd tc = triangular_matvec(sys, tri, c);
    long interior = static_cast<long>(sys.n_steps - 1) * sys.n_dof;
    double num = (vc - tc).head(interior).norm();
    CHECK(num <= 1e-13 * vc.head(interior).norm());
  }
}

TEST_CASE("energy functional") {
  SpaceTimeSystem sys = random_system(4, 6, 2, 91);
  CHECK(energy(sys, Eigen::VectorXd::Zero(sys.total_dim())) == 0.0);
  Eigen::VectorXd c = Eigen::VectorXd::Ones(sys.total_dim());
  Eigen::MatrixXd A = to_dense(sys);
  double want = 0.5 * c.dot(A * c) - sys.rhs_flat().dot(c);
  CHECK(energy(sys, c) == doctest::Approx(want).epsilon(1e-13));
}

TEST_SUITE_END();
