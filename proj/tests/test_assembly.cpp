#include <doctest.h>

#include <cmath>
#include <random>

#include "tdbem/assembly.hpp"
#include "tdbem/quadrature.hpp"

using namespace tdbem;

TEST_SUITE_BEGIN("assembly");

namespace {

struct Setup {
  Mesh mesh = make_icosahedron(1.0);
  TemporalBasis tb{1, make_temporal_grid(0.16, 1.6)};
  SpatialBasis sp;
  QuadratureConfig quick;     // coarse outer refinement for structural tests
  QuadratureConfig accurate;  // oracle-agreement tier
  Setup() {
    sp.mesh = &mesh;
    quick.outer_refine_depth = 2;
    quick.radial_rule = RadialRule::analytic;
    accurate.outer_refine_depth = 7;
    accurate.outer_span_fraction = 0.0625;
    accurate.radial_rule = RadialRule::analytic;
  }
};

// two well-separated triangles for single-pair comparisons
Mesh two_triangle_mesh(double gap) {
  Mesh m;
  m.kind = MeshKind::screen;
  m.vertices = {{0, 0, 0},           {0.4, 0.1, 0},      {0.1, 0.35, 0.05},
                {gap, -0.05, 0.3},   {gap + 0.35, 0, 0.32}, {gap + 0.1, 0.3, 0.28}};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  return m;
}

}  // namespace

TEST_CASE("band cutoff value") {
  CHECK(band_cutoff(2.0, 0.04) == 52);
  CHECK(band_cutoff(2.0, 0.16) == 15);
  CHECK(band_cutoff(std::sqrt(0.5), 0.1) == 10);
}

TEST_CASE("bands beyond the retardation support are exactly zero") {
  Setup s;
  Eigen::MatrixXd far_band =
      assemble_band(s.mesh, s.sp, s.tb, band_cutoff(2.0, 0.16) + 1, s.quick);
  CHECK(far_band.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("entries with distance range disjoint from the kernel support vanish") {
  Setup s;
  Eigen::MatrixXd band = assemble_band(s.mesh, s.sp, s.tb, 1, s.quick);
  // k = 1: support (0, 3*dt) = (0, 0.48); any pair at distance > 0.6 is zero
  int far_i = -1, far_j = -1;
  for (int i = 0; i < s.mesh.n_triangles() && far_i < 0; ++i)
    for (int j = 0; j < s.mesh.n_triangles(); ++j)
      if (triangle_distance_range(s.mesh, i, j).min > 0.6) {
        far_i = i;
        far_j = j;
        break;
      }
  REQUIRE(far_i >= 0);
  CHECK(band(far_j, far_i) == 0.0);
}

TEST_CASE("assembled entries match the oracle on separated and touching pairs") {
  Setup s;
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> tri_pick(0, s.mesh.n_triangles() - 1);
  std::uniform_int_distribution<int> k_pick(-1, 8);
  int checked = 0;
  while (checked < 8) {
    int i = tri_pick(rng), j = tri_pick(rng), k = k_pick(rng);
    DistanceRange d = triangle_distance_range(s.mesh, i, j);
    double got = assemble_band_entry(s.mesh, i, j, k, s.tb, s.accurate);
    double want;
    if (d.min > 1e-12) {
      OracleResult o = oracle_entry_converged(s.mesh, i, j, k, s.tb, 1e-7, 6, s.accurate);
      if (!o.converged) continue;
      want = o.value;
    } else {
      want = oracle_entry_reduced(s.mesh, i, j, k, s.tb, 1e-8);
    }
    ++checked;
    double scale = std::abs(want);
    if (scale < 1e-12) {
      CHECK(std::abs(got) <= 1e-12);
    } else {
      CHECK(std::abs(got - want) / scale <= 1e-5);
    }
  }
}

TEST_CASE("analytic and graded-gauss radial rules agree") {
  Setup s;
  QuadratureConfig graded = s.quick;
  graded.radial_rule = RadialRule::graded_gauss;
  for (int k : {-1, 0, 2, 5}) {
    Eigen::MatrixXd a = assemble_band(s.mesh, s.sp, s.tb, k, s.quick);
    Eigen::MatrixXd b = assemble_band(s.mesh, s.sp, s.tb, k, graded);
    double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-14);
    CHECK((a - b).cwiseAbs().maxCoeff() / scale <= 1e-9);
  }
}

TEST_CASE("entries are stable under raising all quadrature orders") {
  Setup s;
  QuadratureConfig refined = s.accurate;
  refined.outer_degree += 2;
  refined.radial_order += 2;
  refined.angular_order += 2;
  const int pairs[3][2] = {{11, 15}, {12, 2}, {2, 2}};
  for (const auto& pr : pairs)
    for (int k : {0, 5}) {
      double a = assemble_band_entry(s.mesh, pr[0], pr[1], k, s.tb, s.accurate);
      double b = assemble_band_entry(s.mesh, pr[0], pr[1], k, s.tb, refined);
      double scale = std::max(std::abs(a), 1e-12);
      CHECK(std::abs(a - b) / scale <= 1e-8);
    }
}

TEST_CASE("entry magnitude bound for separated pairs") {
  Setup s;
  PiecewisePolynomial psi = temporal_correlation(4, s.tb);
  double psi_max = 0.0;
  for (double r = psi.support_min(); r < psi.support_max(); r += 1e-3)
    psi_max = std::max(psi_max, std::abs(psi(r)));
  Eigen::MatrixXd band = assemble_band(s.mesh, s.sp, s.tb, 4, s.quick);
  for (int i = 0; i < s.mesh.n_triangles(); ++i)
    for (int j = 0; j < s.mesh.n_triangles(); ++j) {
      DistanceRange d = triangle_distance_range(s.mesh, i, j);
      if (d.min < 0.2) continue;
      double bound = s.mesh.triangle_area(i) * s.mesh.triangle_area(j) * psi_max /
                     (2.0 * M_PI * d.min);
      CHECK(std::abs(band(j, i)) <= bound * 1.05);
    }
}

TEST_CASE("assembly is deterministic") {
  Setup s;
  Eigen::MatrixXd a = assemble_band(s.mesh, s.sp, s.tb, 2, s.quick);
  Eigen::MatrixXd b = assemble_band(s.mesh, s.sp, s.tb, 2, s.quick);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("band list does not depend on the number of time steps") {
  Setup s;
  TemporalBasis longer(1, make_temporal_grid(0.16, 3.2));
  Eigen::MatrixXd a = assemble_band(s.mesh, s.sp, s.tb, 3, s.quick);
  Eigen::MatrixXd b = assemble_band(s.mesh, s.sp, longer, 3, s.quick);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembled bands are symmetric") {
  Setup s;
  Eigen::MatrixXd band = assemble_band(s.mesh, s.sp, s.tb, 1, s.quick);
  CHECK((band - band.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("oracle self-convergence") {
  Setup s;
  SUBCASE("smooth separated pair gains roughly two orders per level") {
    int i = 0, j = -1;
    for (int cand = 1; cand < s.mesh.n_triangles(); ++cand)
      if (triangle_distance_range(s.mesh, i, cand).min > 0.8) {
        j = cand;
        break;
      }
    REQUIRE(j > 0);
    int k = 8;  // separated pair sits in this band's annulus
    double d0 = std::abs(oracle_entry(s.mesh, i, j, k, s.tb, 1, s.quick) -
                         oracle_entry(s.mesh, i, j, k, s.tb, 0, s.quick));
    double d1 = std::abs(oracle_entry(s.mesh, i, j, k, s.tb, 2, s.quick) -
                         oracle_entry(s.mesh, i, j, k, s.tb, 1, s.quick));
    double d2 = std::abs(oracle_entry(s.mesh, i, j, k, s.tb, 3, s.quick) -
                         oracle_entry(s.mesh, i, j, k, s.tb, 2, s.quick));
    CHECK(d1 < d0);
    CHECK(d2 < 0.5 * d1);  // at least geometric; typically ~4x or better
  }
  SUBCASE("identical pair error estimate decreases monotonically") {
    double prev_est = 1e300;
    double prev = oracle_entry(s.mesh, 2, 2, 0, s.tb, 0, s.quick);
    for (int depth = 1; depth <= 4; ++depth) {
      double cur = oracle_entry(s.mesh, 2, 2, 0, s.tb, depth, s.quick);
      double est = std::abs(cur - prev);
      CHECK(est <= prev_est * (1.0 + 1e-9));
      prev_est = est;
      prev = cur;
    }
  }
  SUBCASE("far pair with small band is an exact zero") {
    CHECK(oracle_entry(s.mesh, 0, 0, 9, s.tb, 2, s.quick) == 0.0);
  }
}

TEST_CASE("reduced oracle agrees with the subdivision oracle where both converge") {
  Setup s;
  int i = 0, j = -1;
  for (int cand = 1; cand < s.mesh.n_triangles(); ++cand)
    if (triangle_distance_range(s.mesh, i, cand).min > 0.5) {
      j = cand;
      break;
    }
  REQUIRE(j > 0);
  for (int k : {5, 7}) {
    OracleResult sub = oracle_entry_converged(s.mesh, i, j, k, s.tb, 1e-8, 6, s.quick);
    double red = oracle_entry_reduced(s.mesh, i, j, k, s.tb, 1e-9);
    if (!sub.converged) continue;
    double scale = std::max({std::abs(sub.value), std::abs(red), 1e-13});
    CHECK(std::abs(sub.value - red) / scale <= 1e-6);
  }
}

TEST_CASE("rhs blocks: constant-in-time data annihilates interior test functions") {
  Setup s;
  auto f = [](double, const Eigen::Vector3d&) { return 3.7; };
  Eigen::MatrixXd rhs = assemble_rhs(f, s.mesh, s.sp, s.tb, s.quick);
  CHECK(rhs.cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("rhs blocks of spatially constant data are proportional to areas") {
  Setup s;
  auto f = [](double t, const Eigen::Vector3d&) { return std::pow(std::sin(2.0 * t), 5); };
  Eigen::MatrixXd rhs = assemble_rhs(f, s.mesh, s.sp, s.tb, s.quick);
  // all triangles of the icosahedron have equal area; columns must be constant
  for (int n = 0; n < rhs.cols(); ++n) {
    double ref = rhs(0, n);
    for (int j = 1; j < rhs.rows(); ++j) CHECK(rhs(j, n) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("rhs matches an adaptive-quadrature oracle") {
  Setup s;
  Eigen::Vector3d kf(1.5, 3.0, 8.5);
  double w = kf.norm();
  auto f = [kf, w](double t, const Eigen::Vector3d& x) {
    return (t > 0.0 ? std::exp(-25.0 / (t * t)) : 0.0) * std::cos(w * t - kf.dot(x));
  };
  TemporalBasis tb(1, make_temporal_grid(0.16, 5.0));
  QuadratureConfig quad = s.quick;
  quad.rhs_space_degree = 12;  // the data oscillates across these coarse triangles
  quad.rhs_time_order = 16;    // ~1.5 rad phase advance per dt-subinterval
  Eigen::MatrixXd rhs = assemble_rhs(f, s.mesh, s.sp, tb, quad);

  const TriangleRule& fine = triangle_rule(16);
  const double dt = tb.dt();
  for (int n : {12, 25}) {
    for (int j : {0, 7}) {
      MappedTriangleRule sq = map_to_triangle(fine, s.mesh.vertex_of(j, 0),
                                              s.mesh.vertex_of(j, 1), s.mesh.vertex_of(j, 2));
      double want = 0.0;
      for (size_t q = 0; q < sq.points.size(); ++q) {
        Eigen::Vector3d x = sq.points[q];
        double ti = adaptive_simpson([&](double t) { return f(t, x); }, (n - 1) * dt, n * dt,
                                     1e-15, 48) -
                    adaptive_simpson([&](double t) { return f(t, x); }, n * dt, (n + 1) * dt,
                                     1e-15, 48);
        want += sq.weights[q] * ti / dt;
      }
      double scale = std::max(std::abs(want), 1e-8);
      CHECK(std::abs(rhs(j, n - 1) - want) / scale <= 1e-10);
    }
  }
}

TEST_CASE("constant enrichment reduces to the plain band") {
  Setup s;
  Enrichment e;
  e.wave_vectors = {Eigen::Vector3d::Zero()};
  e.phases = {0.0};
  QuadratureConfig quad = s.quick;
  quad.radial_rule = RadialRule::graded_gauss;  // the enriched path always integrates radially
  for (int k : {0, 2}) {
    Eigen::MatrixXd plain = assemble_band(s.mesh, s.sp, s.tb, k, quad);
    Eigen::MatrixXd enr = assemble_band_enriched(s.mesh, s.sp, s.tb, e, k, quad);
    REQUIRE(enr.rows() == plain.rows());
    double scale = std::max(plain.cwiseAbs().maxCoeff(), 1e-14);
    CHECK((plain - enr).cwiseAbs().maxCoeff() / scale <= 1e-8);
  }
}

TEST_CASE("enriched entries match the space-time brute-force oracle") {
  Mesh mesh = two_triangle_mesh(0.8);
  TemporalBasis tb(1, make_temporal_grid(0.16, 1.6));
  SpatialBasis sp{&mesh};
  QuadratureConfig quad;
  quad.outer_refine_depth = 6;
  quad.outer_span_fraction = 0.125;
  Enrichment e;
  e.wave_vectors = {Eigen::Vector3d(2.0, 1.0, 0.5), Eigen::Vector3d(0.5, 2.5, 1.0)};
  e.phases = {0.0, M_PI / 2.0};
  int k = 6;  // pair distance ~0.8 sits inside this band's annulus
  Eigen::MatrixXd band = assemble_band_enriched(mesh, sp, tb, e, k, quad);
  const int n_tri = 2;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double got = band(b * n_tri + 1, a * n_tri + 0);
      double want = oracle_entry_enriched(mesh, 0, 1, k, tb, e, a, b, 4, quad);
      double scale = std::max(std::abs(want), 1e-10);
      CHECK(std::abs(got - want) / scale <= 1e-4);
    }
}

TEST_CASE("invalid inputs are rejected") {
  Setup s;
  CHECK_THROWS_AS(assemble_band(s.mesh, s.sp, s.tb, -2, s.quick), std::invalid_argument);
  QuadratureConfig bad = s.quick;
  bad.radial_order = 0;
  CHECK_THROWS_AS(assemble_band(s.mesh, s.sp, s.tb, 0, bad), std::invalid_argument);
  bad = s.quick;
  bad.grading_ratio = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  Enrichment empty;
  CHECK_THROWS_AS(assemble_band_enriched(s.mesh, s.sp, s.tb, empty, 0, s.quick),
                  std::invalid_argument);
}

TEST_SUITE_END();
