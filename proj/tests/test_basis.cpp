#include <doctest.h>

#include <cmath>
#include <random>

#include "tdbem/basis.hpp"
#include "tdbem/quadrature.hpp"

using namespace tdbem;

TEST_SUITE_BEGIN("basis");

namespace {

// independent 1D quadrature of the defining integral
// psi_k(r) = int shape_{n-k}(t - r) d/dt shape_n(t) dt for q = 1
double psi_oracle(int k, double r, const TemporalBasis& tb, int n) {
  const double dt = tb.dt();
  const int m = n - k;
  double acc = 0.0;
  for (int piece = 0; piece < 2; ++piece) {
    double lo = (n - 1 + piece) * dt, hi = (n + piece) * dt;
    double slope = (piece == 0 ? 1.0 : -1.0) / dt;
    acc += adaptive_simpson(
        [&](double t) { return tb.shape(m, t - r) * slope; }, lo, hi, 1e-14, 48);
  }
  return acc;
}

}  // namespace

TEST_CASE("temporal grid uses the ceiling step count") {
  CHECK(make_temporal_grid(0.04, 2.5).n_steps == 63);  // 2.5/0.04 = 62.5
  CHECK(make_temporal_grid(0.1, 2.5).n_steps == 25);
  CHECK(make_temporal_grid(0.16, 5.0).n_steps == 32);  // 31.25
  CHECK(make_temporal_grid(1.0, 0.5).n_steps == 1);
  CHECK_THROWS_AS(make_temporal_grid(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("hats form a partition of unity inside the grid") {
  TemporalBasis tb(1, make_temporal_grid(0.1, 1.0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double t = unif(rng);
    double sum = 0.0;
    for (int m = 1; m <= tb.grid().n_steps; ++m) sum += tb.shape(m, t);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("piecewise polynomial evaluation and antiderivative") {
  // f = 1 on [0,1), x-1 -> slope on [1,2)
  PiecewisePolynomial f({0.0, 1.0, 2.0}, {{1.0}, {1.0, -1.0}});
  CHECK(f(0.5) == doctest::Approx(1.0));
  CHECK(f(1.5) == doctest::Approx(0.5));
  CHECK(f(-0.1) == 0.0);
  CHECK(f(2.1) == 0.0);
  PiecewisePolynomial F = f.antiderivative();
  CHECK(F(0.0) == doctest::Approx(0.0));
  CHECK(F(1.0) == doctest::Approx(1.0));
  CHECK(F(2.0) == doctest::Approx(1.5));
  CHECK(F(5.0) == doctest::Approx(1.5));  // clamped beyond the support
  CHECK(f.integral(0.5, 1.5) == doctest::Approx(0.5 + 0.375));
}

TEST_CASE("temporal correlation: support and special values") {
  TemporalBasis tb(1, make_temporal_grid(0.1, 2.0));
  const double dt = 0.1;

  SUBCASE("zero outside the support window") {
    for (int k : {-1, 0, 1, 3, 7}) {
      PiecewisePolynomial psi = temporal_correlation(k, tb);
      CHECK(psi((k + 2) * dt + 1e-6) == 0.0);
      CHECK(psi((k - 2) * dt - 1e-6) == 0.0);
      CHECK(psi.support_max() <= (k + 2) * dt + 1e-12);
      CHECK(psi.support_min() >= std::max(0.0, (k - 2) * dt) - 1e-12);
      CHECK(psi.degree() <= 2);
    }
  }
  SUBCASE("psi_0(0) vanishes for interior hats") {
    PiecewisePolynomial psi0 = temporal_correlation(0, tb);
    CHECK(psi0(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("psi_1(0.05) matches the quadrature oracle to 1e-12") {
    PiecewisePolynomial psi1 = temporal_correlation(1, tb);
    double want = psi_oracle(1, 0.05, tb, 5);
    CHECK(std::abs(psi1(0.05) - want) <= 1e-12);
    CHECK(psi1(0.05) == doctest::Approx(0.625).epsilon(1e-12));
  }
  SUBCASE("rejects k < -1") {
    CHECK_THROWS_AS(temporal_correlation(-2, tb), std::invalid_argument);
  }
}

TEST_CASE("temporal correlation matches the quadrature oracle at random points") {
  TemporalBasis tb(1, make_temporal_grid(0.13, 2.6));
  std::mt19937 rng(12345);
  for (int k : {-1, 0, 1, 2, 5}) {
    PiecewisePolynomial psi = temporal_correlation(k, tb);
    std::uniform_real_distribution<double> unif(0.0, (k + 2.5) * 0.13);
    for (int trial = 0; trial < 20; ++trial) {
      double r = std::abs(unif(rng));
      double want = psi_oracle(k, r, tb, std::max(k, 0) + 3);
      CHECK(std::abs(psi(r) - want) <= 1e-10);
    }
  }
}

TEST_CASE("band kernels telescope to zero when summed over k") {
  TemporalBasis tb(1, make_temporal_grid(0.1, 3.0));
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.2);
  std::vector<PiecewisePolynomial> psis;
  for (int k = -1; k <= 15; ++k) psis.push_back(temporal_correlation(k, tb));
  for (int trial = 0; trial < 30; ++trial) {
    double r = unif(rng);
    if (r < 2 * 0.1) continue;  // interior range only: all meeting bands have k >= -1
    double sum = 0.0;
    for (const auto& psi : psis) sum += psi(r);
    CHECK(std::abs(sum) <= 1e-13);
  }
}

TEST_CASE("first variant coincides with interior for the admissible bands") {
  TemporalBasis tb(1, make_temporal_grid(0.1, 2.0));
  for (int k : {-1, 0}) {
    PiecewisePolynomial interior = temporal_correlation(k, tb);
    PiecewisePolynomial first = temporal_correlation(k, tb, CorrelationVariant::first);
    for (double r : {0.01, 0.05, 0.14, 0.25}) CHECK(first(r) == doctest::Approx(interior(r)));
  }
}

TEST_CASE("last variant truncates at the cap") {
  TemporalBasis tb(1, make_temporal_grid(0.1, 1.0));
  const int n = tb.grid().n_steps;
  const double cap = n * 0.1;
  PiecewisePolynomial last0 = temporal_correlation(0, tb, CorrelationVariant::last, cap);
  // oracle with both hats clipped at the cap
  auto clipped_shape = [&](int m, double t) { return t <= cap ? tb.shape(m, t) : 0.0; };
  auto oracle = [&](double r) {
    double acc = 0.0;
    double lo = (n - 1) * 0.1, hi = std::min(n * 0.1, cap);
    acc += adaptive_simpson([&](double t) { return clipped_shape(n, t - r) * 10.0; }, lo, hi,
                            1e-14, 48);
    return acc;  // the decreasing piece is cut away entirely by the cap
  };
  for (double r : {0.02, 0.05, 0.08}) CHECK(last0(r) == doctest::Approx(oracle(r)).epsilon(1e-10));
}

TEST_CASE("q = 0 kernels are the step differences") {
  TemporalBasis tb(0, make_temporal_grid(0.1, 1.0));
  PiecewisePolynomial psi0 = temporal_correlation(0, tb);
  CHECK(psi0(0.05) == doctest::Approx(-1.0));
  CHECK(psi0(0.15) == doctest::Approx(0.0));
  PiecewisePolynomial psi2 = temporal_correlation(2, tb);
  CHECK(psi2(0.15) == doctest::Approx(1.0));
  CHECK(psi2(0.25) == doctest::Approx(-1.0));
  CHECK(psi2(0.35) == doctest::Approx(0.0));
  CHECK_THROWS_AS(temporal_correlation(-1, tb), std::invalid_argument);
}

TEST_CASE("enrichment evaluation") {
  Enrichment e;
  e.wave_vectors = {Eigen::Vector3d::Zero(), Eigen::Vector3d(8.5, 3.0, 0.5),
                    Eigen::Vector3d(1.0, 2.0, 2.0)};
  e.phases = {0.0, 0.0, M_PI / 2.0};
  SUBCASE("zero wave vector gives the constant 1") {
    CHECK(eval_enrichment(e, 0, 1.7, {0.3, -0.2, 5.0}) == doctest::Approx(1.0));
  }
  SUBCASE("frequency is the Euclidean norm") {
    CHECK(e.frequency(1) == doctest::Approx(std::sqrt(72.25 + 9.0 + 0.25)));
    CHECK(e.frequency(1) == doctest::Approx(9.0277).epsilon(1e-4));
  }
  SUBCASE("pi/2 phase shift gives minus sine") {
    double t = 0.37;
    Eigen::Vector3d x(0.1, 0.2, 0.3);
    double w = e.frequency(2);
    CHECK(eval_enrichment(e, 2, t, x) ==
          doctest::Approx(-std::sin(w * t - e.wave_vectors[2].dot(x))));
  }
  SUBCASE("index out of range") { CHECK_THROWS(eval_enrichment(e, 3, 0.0, {0, 0, 0})); }
}

TEST_CASE("default enrichment family") {
  Enrichment e7 = default_enrichment(7, 9.0277);
  CHECK(e7.size() == 7);
  CHECK(e7.wave_vectors[0].norm() == 0.0);
  CHECK(e7.phases[0] == 0.0);
  for (int i = 1; i < 7; ++i) CHECK(e7.frequency(i) == doctest::Approx(9.0277));
  CHECK(e7.phases[1] == 0.0);
  CHECK(e7.phases[2] == doctest::Approx(M_PI / 2));
  Enrichment e15 = default_enrichment(15, 2.0);
  CHECK(e15.size() == 15);
}

TEST_SUITE_END();
