#include <CLI11.hpp>
#include <iostream>

#include "tdbem/assembly.hpp"
#include "tdbem/mesh.hpp"
#include "tdbem/runner.hpp"
#include "tdbem/system.hpp"

namespace {

using namespace tdbem;

int cmd_mesh(const std::string& kind, int refine, int n, double radius,
             const std::string& output) {
  Mesh mesh;
  if (kind == "screen") {
    mesh = make_screen(n);
  } else {
    mesh = refine_uniform(make_icosahedron(radius), refine, kind == "sphere");
  }
  validate_mesh(mesh);
  write_mesh(mesh, output);
  MeshStats s = mesh_stats(mesh);
  std::cout << "wrote " << output << ": " << mesh.n_vertices() << " vertices, "
            << mesh.n_triangles() << " triangles, diameter " << s.diameter << ", h_max "
            << s.h_max << ", area " << s.total_area << "\n";
  return 0;
}

void apply_overrides(RunConfig& cfg, const std::string& solver, double tol, int max_iter,
                     const std::string& output, int threads) {
  if (!solver.empty()) {
    if (solver != "gmres" && solver != "pgmres" && solver != "standalone")
      throw std::invalid_argument("unknown solver '" + solver + "'");
    cfg.solvers = {solver};
  }
  if (tol > 0.0) cfg.tolerance = tol;
  if (max_iter > 0) cfg.max_iterations = max_iter;
  if (!output.empty()) cfg.output_dir = output;
  if (threads > 0) cfg.threads = threads;
}

int cmd_run(const std::string& config_path, const std::string& solver, double tol, int max_iter,
            const std::string& output, int threads, bool dry_run) {
  RunConfig cfg = parse_run_config(config_path);
  apply_overrides(cfg, solver, tol, max_iter, output, threads);
  cfg.dry_run = dry_run;
  RunResult res = run_example(cfg);
  std::cout << "run: " << res.n_dof_space << " spatial DOF x " << res.n_steps << " steps ("
            << res.total_dof << " unknowns), " << res.n_bands << " bands, CFL dt/h = " << res.cfl
            << "\n";
  if (res.dry_run) {
    std::cout << "dry run: nothing assembled\n";
    return 0;
  }
  bool ok = true;
  for (const auto& [name, rep] : res.reports) {
    std::cout << "  " << name << ": iterations " << rep.iterations << ", energy " << rep.energy
              << ", final residual " << rep.final_plain_residual()
              << (rep.converged ? "" : " [NOT CONVERGED]") << "\n";
    ok &= rep.converged;
  }
  if (res.l2_error >= 0.0) std::cout << "  relative L2 density error " << res.l2_error << "\n";
  std::cout << "outputs in " << res.output_dir << "\n";
  return ok ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              std::vector<double> values, const std::string& solver, double tol, int max_iter,
              const std::string& output, int threads) {
  RunConfig cfg = parse_run_config(config_path);
  apply_overrides(cfg, solver, tol, max_iter, output, threads);
  std::string csv = sweep(cfg, axis, values);
  std::cout << "sweep written to " << csv << "\n";
  return 0;
}

// quick oracle/property verification on a small geometry
int cmd_verify() {
  std::cout << "verify: 20-triangle icosahedron, dt = 0.16\n";
  Mesh mesh = make_icosahedron(1.0);
  validate_mesh(mesh);
  TemporalBasis tb(1, make_temporal_grid(0.16, 1.6));
  SpatialBasis sp{&mesh};
  QuadratureConfig quad;
  int failures = 0;
  auto check = [&failures](bool ok, const std::string& what) {
    std::cout << (ok ? "  PASS " : "  FAIL ") << what << "\n";
    if (!ok) ++failures;
  };

  // band identities and extrapolation exactness on an assembled system
  SpaceTimeSystem sys;
  sys.bands = assemble_all_bands(mesh, sp, tb, quad);
  sys.n_dof = mesh.n_triangles();
  sys.n_steps = tb.grid().n_steps;
  sys.rhs = Eigen::MatrixXd::Zero(sys.n_dof, sys.n_steps);
  TriangularSystem tri = build_preconditioner(sys);
  double id0 = (tri.band(0) - (sys.band(0) + 2.0 * sys.band(-1))).cwiseAbs().maxCoeff();
  double id1 = (tri.band(1) - (sys.band(1) - sys.band(-1))).cwiseAbs().maxCoeff();
  check(id0 == 0.0 && id1 == 0.0, "preconditioner band identities");

  Eigen::VectorXd c1 = Eigen::VectorXd::Random(sys.n_dof);
  Eigen::VectorXd c(sys.total_dim());
  for (int m = 1; m <= sys.n_steps; ++m) c.segment((m - 1) * sys.n_dof, sys.n_dof) = m * c1;
  Eigen::VectorXd vc = matvec(sys, c);
  Eigen::VectorXd tc = triangular_matvec(sys, tri, c);
  double num = (vc - tc).head((sys.n_steps - 1) * sys.n_dof).norm();
  double den = vc.head((sys.n_steps - 1) * sys.n_dof).norm();
  check(num <= 1e-13 * den, "extrapolation exactness on linear-in-time data");

  // assembled entries against the independent oracle (small deterministic set)
  QuadratureConfig accurate;
  accurate.outer_refine_depth = 7;
  accurate.outer_span_fraction = 0.0625;
  accurate.radial_rule = RadialRule::analytic;
  int bad = 0;
  const int pairs[4][2] = {{0, 7}, {3, 15}, {2, 2}, {5, 11}};
  for (const auto& pr : pairs) {
    for (int k : {1, 4, 9}) {
      double got = assemble_band_entry(mesh, pr[0], pr[1], k, tb, accurate);
      double want = oracle_entry_reduced(mesh, pr[0], pr[1], k, tb, 1e-8);
      double scale = std::max(std::abs(want), 1e-12);
      if (std::abs(got - want) / scale > 1e-5) ++bad;
    }
  }
  check(bad == 0, "assembly vs oracle entries");
  std::cout << (failures == 0 ? "verify OK\n" : "verify FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-domain Galerkin boundary elements for the 3D wave equation"};
  app.require_subcommand(1);

  auto* mesh_cmd = app.add_subcommand("mesh", "generate a mesh file");
  std::string mesh_kind = "sphere", mesh_output = "mesh.txt";
  int mesh_refine = 0, mesh_n = 12;
  double mesh_radius = 1.0;
  mesh_cmd->add_option("--kind", mesh_kind, "sphere | icosahedron | screen");
  mesh_cmd->add_option("--refine", mesh_refine, "subdivision levels");
  mesh_cmd->add_option("--n", mesh_n, "screen grid count");
  mesh_cmd->add_option("--radius", mesh_radius, "circumradius");
  mesh_cmd->add_option("--output", mesh_output, "output path");

  std::string config_path, solver, output;
  double tol = -1.0;
  int max_iter = -1, threads = -1;
  bool dry_run = false;

  auto* run_cmd = app.add_subcommand("run", "run one configured experiment");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--solver", solver, "gmres | pgmres | standalone (overrides config)");
  run_cmd->add_option("--tol", tol, "residual tolerance override");
  run_cmd->add_option("--max-iter", max_iter, "iteration cap override");
  run_cmd->add_option("--output", output, "output directory override");
  run_cmd->add_option("--threads", threads, "thread count (recorded in output)");
  run_cmd->add_flag("--dry-run", dry_run, "validate config and print derived quantities only");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a config across an axis");
  std::string axis = "refinement";
  std::vector<double> values;
  sweep_cmd->add_option("--config", config_path, "config file")->required();
  sweep_cmd->add_option("--axis", axis, "refinement | dt | enrichments");
  sweep_cmd->add_option("--values", values, "axis values")->required()->expected(-2);
  sweep_cmd->add_option("--solver", solver, "solver override");
  sweep_cmd->add_option("--tol", tol, "residual tolerance override");
  sweep_cmd->add_option("--max-iter", max_iter, "iteration cap override");
  sweep_cmd->add_option("--output", output, "output directory override");
  sweep_cmd->add_option("--threads", threads, "thread count (recorded in output)");

  auto* verify_cmd = app.add_subcommand("verify", "run the built-in oracle/property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) return cmd_mesh(mesh_kind, mesh_refine, mesh_n, mesh_radius, mesh_output);
    if (run_cmd->parsed()) return cmd_run(config_path, solver, tol, max_iter, output, threads, dry_run);
    if (sweep_cmd->parsed())
      return cmd_sweep(config_path, axis, values, solver, tol, max_iter, output, threads);
    if (verify_cmd->parsed()) return cmd_verify();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
