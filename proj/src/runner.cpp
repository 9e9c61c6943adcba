#include "tdbem/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "tdbem/band_cache.hpp"
#include "tdbem/postprocess.hpp"
#include "tdbem/rhs_presets.hpp"

namespace tdbem {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Mesh build_mesh(const RunConfig& cfg) {
  if (cfg.geometry == "screen") return make_screen(cfg.screen_n);
  Mesh ico = make_icosahedron(1.0);
  return refine_uniform(ico, cfg.refine, cfg.geometry == "sphere");
}

Enrichment build_enrichment(const RunConfig& cfg, const RhsPreset& rhs) {
  if (!cfg.enrichment_vectors.empty()) {
    Enrichment e;
    e.wave_vectors = cfg.enrichment_vectors;
    e.phases = cfg.enrichment_phases;
    return e;
  }
  double w = cfg.wave_number.value_or(rhs.omega_f);
  return default_enrichment(cfg.enrichment_count, w);
}

SolverMode mode_of(const std::string& name) {
  if (name == "gmres") return SolverMode::gmres;
  if (name == "pgmres") return SolverMode::preconditioned_gmres;
  return SolverMode::standalone;
}

void write_residual_csv(const std::string& path, const SolveReport& rep) {
  std::ofstream out(path);
  out.precision(16);
  out << "iteration,plain_residual,preconditioned_residual\n";
  for (size_t i = 0; i < rep.residual_history_plain.size(); ++i) {
    out << i << "," << rep.residual_history_plain[i] << ",";
    if (i < rep.residual_history_prec.size()) out << rep.residual_history_prec[i];
    out << "\n";
  }
}

}  // namespace

SpaceTimeSystem build_system(const RunConfig& cfg, bool* cache_hit, double* assembly_seconds) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Mesh mesh = build_mesh(cfg);
  validate_mesh(mesh);
  TemporalBasis tb(cfg.temporal_degree, make_temporal_grid(cfg.dt, cfg.t_final));
  SpatialBasis sp{&mesh};
  RhsPreset rhs = make_rhs_preset(cfg.rhs_preset,
                                  cfg.k_f_override ? &*cfg.k_f_override : nullptr);

  SpaceTimeSystem sys;
  sys.n_steps = tb.grid().n_steps;

  bool hit = false;
  std::string cache_path;
  if (cfg.band_cache) {
    fs::create_directories(cfg.cache_dir);
    // key on geometry, dt, quadrature and enrichment only; the bands do not
    // depend on solver settings or the grid length
    RunConfig key_cfg = cfg;
    key_cfg.t_final = 1.0;
    key_cfg.solvers = {};
    std::string canonical = config_to_string(key_cfg);
    cache_path = cfg.cache_dir + "/bands_" + cache_key(canonical) + ".bin";
    if (auto cached = read_band_cache(cache_path)) {
      if (cached->k_min == -1 && std::abs(cached->dt - cfg.dt) < 1e-15) {
        sys.bands = std::move(cached->bands);
        hit = true;
      }
    }
  }

  if (cfg.enrichment_count > 0) {
    Enrichment e = build_enrichment(cfg, rhs);
    if (!hit) sys.bands = assemble_all_bands_enriched(mesh, sp, tb, e, cfg.quad);
    sys.rhs = assemble_rhs_enriched(rhs.f, mesh, sp, tb, e, cfg.quad);
    sys.n_dof = e.size() * mesh.n_triangles();
  } else {
    if (!hit) sys.bands = assemble_all_bands(mesh, sp, tb, cfg.quad);
    sys.rhs = assemble_rhs(rhs.f, mesh, sp, tb, cfg.quad);
    sys.n_dof = mesh.n_triangles();
  }
  if (cfg.band_cache && !hit) write_band_cache(cache_path, sys.bands, -1, cfg.dt);
  sys.validate();

  if (cache_hit) *cache_hit = hit;
  if (assembly_seconds)
    *assembly_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sys;
}

RunResult run_example(const RunConfig& cfg) {
  cfg.validate();
  RunResult res;
  res.output_dir = cfg.output_dir;
  fs::create_directories(cfg.output_dir);

  Mesh mesh = build_mesh(cfg);
  validate_mesh(mesh);
  MeshStats stats = mesh_stats(mesh);
  TemporalBasis tb(cfg.temporal_degree, make_temporal_grid(cfg.dt, cfg.t_final));
  RhsPreset rhs = make_rhs_preset(cfg.rhs_preset,
                                  cfg.k_f_override ? &*cfg.k_f_override : nullptr);

  const int n_enr = cfg.enrichment_count > 0 ? cfg.enrichment_count : 1;
  res.n_dof_space = n_enr * mesh.n_triangles();
  res.n_steps = tb.grid().n_steps;
  res.n_bands = band_cutoff(stats.diameter, cfg.dt) + 2;  // k = -1 .. n_b
  res.total_dof = static_cast<long>(res.n_dof_space) * res.n_steps;
  res.h_max = stats.h_max;
  res.diameter = stats.diameter;
  res.cfl = cfg.dt / stats.h_max;
  res.dry_run = cfg.dry_run;

  json summary;
  summary["config"] = {
      {"geometry", cfg.geometry},
      {"refine", cfg.refine},
      {"n", cfg.screen_n},
      {"dt", cfg.dt},
      {"t_final", cfg.t_final},
      {"q", cfg.temporal_degree},
      {"rhs", cfg.rhs_preset},
      {"tolerance", cfg.tolerance},
      {"max_iterations", cfg.max_iterations},
      {"solvers", cfg.solvers},
      {"quadrature",
       {{"outer_degree", cfg.quad.outer_degree},
        {"radial_order", cfg.quad.radial_order},
        {"angular_order", cfg.quad.angular_order},
        {"grading_ratio", cfg.quad.grading_ratio},
        {"grading_depth", cfg.quad.grading_depth},
        {"radial_rule",
         cfg.quad.radial_rule == RadialRule::analytic ? "analytic" : "graded-gauss"},
        {"rhs_time_order", cfg.quad.rhs_time_order},
        {"time_order", cfg.quad.time_order}}},
      {"enrichment_count", cfg.enrichment_count},
      {"band_cache", cfg.band_cache},
      {"output_dir", cfg.output_dir},
      {"threads", cfg.threads},
  };
  if (cfg.k_f_override)
    summary["config"]["k_f"] = {(*cfg.k_f_override)[0], (*cfg.k_f_override)[1],
                                (*cfg.k_f_override)[2]};
  if (cfg.wave_number) summary["config"]["wave_number"] = *cfg.wave_number;
  summary["derived"] = {
      {"n_dof_space", res.n_dof_space}, {"n_steps", res.n_steps},
      {"n_bands", res.n_bands},         {"total_dof", res.total_dof},
      {"h_max", res.h_max},             {"h_min", stats.h_min},
      {"diameter", res.diameter},       {"total_area", stats.total_area},
      {"cfl", res.cfl},                 {"omega_f", rhs.omega_f},
  };

  if (cfg.dry_run) {
    summary["dry_run"] = true;
    std::ofstream out(cfg.output_dir + "/summary.json");
    out << summary.dump(2) << "\n";
    return res;
  }

  SpaceTimeSystem sys = build_system(cfg, &res.cache_hit, &res.assembly_seconds);
  summary["assembly"] = {{"seconds", res.assembly_seconds}, {"cache_hit", res.cache_hit}};

  bool needs_precond = false;
  for (const auto& s : cfg.solvers) needs_precond |= (s != "gmres");
  TriangularSystem tri;
  if (needs_precond) tri = build_preconditioner(sys);

  for (const auto& name : cfg.solvers) {
    SolverConfig scfg;
    scfg.tolerance = cfg.tolerance;
    scfg.max_iterations = cfg.max_iterations;
    scfg.mode = mode_of(name);
    SolveReport rep;
    if (scfg.mode == SolverMode::standalone)
      rep = standalone_solve(sys, tri);
    else
      rep = gmres_solve(sys, scfg,
                        scfg.mode == SolverMode::preconditioned_gmres ? &tri : nullptr);
    write_residual_csv(cfg.output_dir + "/residuals_" + name + ".csv", rep);
    summary["results"][name] = {
        {"iterations", rep.iterations},
        {"converged", rep.converged},
        {"hit_max_iterations", rep.hit_max_iterations},
        {"energy", rep.energy},
        {"final_plain_residual", rep.final_plain_residual()},
        {"wall_time_s", rep.wall_time_s},
    };
    if (!rep.residual_history_prec.empty())
      summary["results"][name]["final_preconditioned_residual"] = rep.final_prec_residual();
    res.reports[name] = std::move(rep);
  }
  // the canonical residuals.csv carries the preconditioned run when present
  if (res.reports.count("pgmres"))
    write_residual_csv(cfg.output_dir + "/residuals.csv", res.reports.at("pgmres"));
  else if (!res.reports.empty())
    write_residual_csv(cfg.output_dir + "/residuals.csv", res.reports.begin()->second);

  // density error against the known exact solution (valid on the sphere)
  bool want_err = (cfg.density_error == "true") ||
                  (cfg.density_error == "auto" && rhs.has_exact && cfg.geometry == "sphere" &&
                   cfg.enrichment_count == 0);
  if (want_err && rhs.has_exact && cfg.enrichment_count == 0) {
    const SolveReport* best = nullptr;
    for (const char* prefer : {"pgmres", "gmres", "standalone"})
      if (!best && res.reports.count(prefer)) best = &res.reports.at(prefer);
    if (best) {
      double abs_err = l2_density_error(best->solution, rhs.exact_density, mesh, tb);
      double norm = space_time_l2_norm(rhs.exact_density, mesh, tb);
      res.l2_error_abs = abs_err;
      res.l2_error = abs_err / norm;
      summary["errors"] = {{"l2_density_error", abs_err},
                           {"relative_l2_error", res.l2_error},
                           {"exact_l2_norm", norm}};
      std::ofstream out(cfg.output_dir + "/density_error.csv");
      out.precision(16);
      out << "h_max,dof,l2_density_error,relative_l2_error\n";
      out << stats.h_max << "," << res.total_dof << "," << abs_err << "," << res.l2_error << "\n";
    }
  }

  if (!cfg.pressure_points.empty() && !res.reports.empty()) {
    const SolveReport& rep = res.reports.count("pgmres") ? res.reports.at("pgmres")
                                                         : res.reports.begin()->second;
    Eigen::MatrixXd u =
        eval_pressure(rep.solution, mesh, tb, cfg.pressure_points, cfg.pressure_times);
    std::ofstream out(cfg.output_dir + "/pressure.csv");
    out.precision(16);
    out << "x,y,z,t,u\n";
    for (size_t p = 0; p < cfg.pressure_points.size(); ++p)
      for (size_t s = 0; s < cfg.pressure_times.size(); ++s)
        out << cfg.pressure_points[p][0] << "," << cfg.pressure_points[p][1] << ","
            << cfg.pressure_points[p][2] << "," << cfg.pressure_times[s] << "," << u(p, s)
            << "\n";
  }

  std::ofstream out(cfg.output_dir + "/summary.json");
  out << summary.dump(2) << "\n";
  return res;
}

std::string sweep(const RunConfig& base, const std::string& axis,
                  const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("sweep: needs at least 2 axis values");
  if (axis != "refinement" && axis != "dt" && axis != "enrichments")
    throw std::invalid_argument("sweep: axis must be refinement, dt or enrichments");
  fs::create_directories(base.output_dir);
  std::string csv_path = base.output_dir + "/sweep.csv";
  std::ofstream out(csv_path);
  out.precision(16);
  out << "axis_value,dof_space,n_steps,total_dof,iterations_gmres,iterations_pgmres,"
         "energy_gmres,energy_pgmres,energy_standalone,standalone_rel_energy_error,"
         "relative_l2_error,status\n";

  for (double v : values) {
    RunConfig cfg = base;
    std::ostringstream sub;
    sub << base.output_dir << "/" << axis << "_" << v;
    cfg.output_dir = sub.str();
    if (axis == "refinement") {
      if (cfg.geometry == "screen") cfg.screen_n = static_cast<int>(v);
      else cfg.refine = static_cast<int>(v);
    } else if (axis == "dt") {
      cfg.dt = v;
    } else {
      cfg.enrichment_count = static_cast<int>(v);
    }
    out << v << ",";
    try {
      RunResult r = run_example(cfg);
      auto it_g = r.reports.find("gmres");
      auto it_p = r.reports.find("pgmres");
      auto it_s = r.reports.find("standalone");
      double e_ref = it_p != r.reports.end() ? it_p->second.energy
                     : it_g != r.reports.end() ? it_g->second.energy : 0.0;
      out << r.n_dof_space << "," << r.n_steps << "," << r.total_dof << ",";
      if (it_g != r.reports.end()) out << it_g->second.iterations;
      out << ",";
      if (it_p != r.reports.end()) out << it_p->second.iterations;
      out << ",";
      if (it_g != r.reports.end()) out << it_g->second.energy;
      out << ",";
      if (it_p != r.reports.end()) out << it_p->second.energy;
      out << ",";
      if (it_s != r.reports.end()) out << it_s->second.energy;
      out << ",";
      if (it_s != r.reports.end() && e_ref != 0.0)
        out << std::abs(it_s->second.energy - e_ref) / std::abs(e_ref);
      out << ",";
      if (r.l2_error >= 0.0) out << r.l2_error;
      out << ",ok\n";
    } catch (const std::exception& e) {
      std::string what = e.what();
      for (auto& ch : what)
        if (ch == ',' || ch == '\n') ch = ' ';
      out << ",,,,,,,,,,failed: " << what << "\n";
    }
    out.flush();
  }
  return csv_path;
}

}  // namespace tdbem
