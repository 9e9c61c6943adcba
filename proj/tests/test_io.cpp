#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "tdbem/band_cache.hpp"
#include "tdbem/rhs_presets.hpp"
#include "tdbem/run_config.hpp"

using namespace tdbem;

TEST_SUITE_BEGIN("io");

TEST_CASE("band cache round trip is bit exact") {
  std::mt19937 rng(44);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::MatrixXd> bands(4, Eigen::MatrixXd(5, 5));
  for (auto& b : bands)
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) b(r, c) = gauss(rng);
  std::string path = "test_band_cache.bin";
  write_band_cache(path, bands, -1, 0.125);
  auto back = read_band_cache(path);
  REQUIRE(back.has_value());
  CHECK(back->k_min == -1);
  CHECK(back->dt == 0.125);
  REQUIRE(back->bands.size() == bands.size());
  for (size_t i = 0; i < bands.size(); ++i)
    CHECK((back->bands[i] - bands[i]).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("band cache handles missing and corrupt files") {
  CHECK(!read_band_cache("no_such_file.bin").has_value());
  std::string path = "test_band_cache_bad.bin";
  std::ofstream(path) << "definitely not a band cache";
  CHECK_THROWS(read_band_cache(path));
  std::remove(path.c_str());
}

TEST_CASE("cache keys are stable and distinct") {
  CHECK(cache_key("abc") == cache_key("abc"));
  CHECK(cache_key("abc") != cache_key("abd"));
  CHECK(cache_key("x").size() == 16);
}

TEST_CASE("run config parsing") {
  std::string path = "test_config.cfg";
  {
    std::ofstream out(path);
    out << "# experiment preset\n"

           "[geometry]\n"
           "kind = sphere\n"
           "refine = 2\n"
           "[time]\n"
           "dt = 0.04\n"
           "t_final = 2.5\n"
           "q = 1\n"
           "[rhs]\n"
           "preset = example1\n"
           "[solver]\n"
           "tolerance = 1e-9\n"
           "max_iterations = 250\n"
           "modes = gmres pgmres standalone\n"
           "[quadrature]\n"
           "radial_rule = analytic\n"
           "[output]\n"
           "directory = out_test\n"
           "band_cache = false\n";
  }
  RunConfig cfg = parse_run_config(path);
  CHECK(cfg.geometry == "sphere");
  CHECK(cfg.refine == 2);
  CHECK(cfg.dt == 0.04);
  CHECK(cfg.t_final == 2.5);
  CHECK(cfg.rhs_preset == "example1");
  CHECK(cfg.tolerance == 1e-9);
  CHECK(cfg.max_iterations == 250);
  REQUIRE(cfg.solvers.size() == 3);
  CHECK(cfg.quad.radial_rule == RadialRule::analytic);
  CHECK(cfg.output_dir == "out_test");
  CHECK(!cfg.band_cache);
  std::remove(path.c_str());
}

TEST_CASE("config errors carry file and line diagnostics") {
  std::string path = "test_config_bad.cfg";
  {
    std::ofstream out(path);
    out << "[geometry]\nkind = sphere\nbananas = 3\n";
  }
  try {
    parse_run_config(path);
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    std::string what = e.what();
    CHECK(what.find("test_config_bad.cfg:3") != std::string::npos);
    CHECK(what.find("bananas") != std::string::npos);
  }
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "[time]\ndt = -0.5\n";
  }
  CHECK_THROWS(parse_run_config(path));
  std::remove(path.c_str());
}

TEST_CASE("rhs presets") {
  RhsPreset p1 = make_rhs_preset("example1");
  CHECK(p1.has_exact);
  CHECK(p1.f(0.0, {0, 0, 0}) == 0.0);
  CHECK(p1.f(0.3, {1, 2, 3}) == doctest::Approx(std::pow(std::sin(0.6), 5)));
  CHECK(p1.exact_density(0.3, {0, 0, 0}) ==
        doctest::Approx(10.0 * std::cos(0.6) * std::pow(std::sin(0.6), 4)));

  RhsPreset p2 = make_rhs_preset("example2");
  CHECK(p2.omega_f == doctest::Approx(std::sqrt(1.5 * 1.5 + 9.0 + 72.25)));
  CHECK(p2.f(0.0, {0, 0, 0}) == 0.0);  // removable gate limit
  CHECK(p2.f(-1.0, {0, 0, 0}) == 0.0);
  CHECK(p2.f(2.0, {0, 0, 0}) ==
        doctest::Approx(std::exp(-25.0 / 4.0) * std::cos(p2.omega_f * 2.0)));

  RhsPreset p3 = make_rhs_preset("example3");
  CHECK(p3.omega_f == doctest::Approx(2.0 * std::sqrt(3.0)));

  RhsPreset p4 = make_rhs_preset("example4");
  CHECK(p4.omega_f == doctest::Approx(9.0277).epsilon(1e-4));
  CHECK(!p4.has_exact);

  Eigen::Vector3d kov(1.0, 0.0, 0.0);
  RhsPreset pov = make_rhs_preset("example2", &kov);
  CHECK(pov.omega_f == doctest::Approx(1.0));

  CHECK_THROWS_AS(make_rhs_preset("example9"), std::invalid_argument);
}

TEST_SUITE_END();
