#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tdbem/assembly.hpp"
#include "tdbem/band_cache.hpp"
#include "tdbem/basis.hpp"
#include "tdbem/mesh.hpp"
#include "tdbem/postprocess.hpp"
#include "tdbem/rhs_presets.hpp"
#include "tdbem/run_config.hpp"
#include "tdbem/runner.hpp"
#include "tdbem/solver.hpp"
#include "tdbem/system.hpp"

namespace py = pybind11;
using namespace tdbem;

namespace {

Eigen::MatrixXi triangles_array(const Mesh& m) {
  Eigen::MatrixXi t(m.n_triangles(), 3);
  for (int i = 0; i < m.n_triangles(); ++i)
    for (int c = 0; c < 3; ++c) t(i, c) = m.triangles[i][c];
  return t;
}

Eigen::MatrixXd vertices_array(const Mesh& m) {
  Eigen::MatrixXd v(m.n_vertices(), 3);
  for (int i = 0; i < m.n_vertices(); ++i) v.row(i) = m.vertices[i].transpose();
  return v;
}

SpaceTimeFn wrap_fn(const py::object& f) {
  if (py::isinstance<RhsPreset>(f)) {
    return f.cast<RhsPreset&>().f;
  }
  auto fn = f.cast<std::function<double(double, Eigen::Vector3d)>>();
  return [fn](double t, const Eigen::Vector3d& x) { return fn(t, x); };
}

}  // namespace

PYBIND11_MODULE(_tdbem, m) {
  m.doc() = "space-time Galerkin boundary elements for the 3D wave equation";

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n_vertices", &Mesh::n_vertices)
      .def_property_readonly("n_triangles", &Mesh::n_triangles)
      .def_property_readonly("vertices", &vertices_array)
      .def_property_readonly("triangles", &triangles_array)
      .def_property_readonly("kind",
                             [](const Mesh& mm) {
                               return mm.kind == MeshKind::screen ? "screen" : "closed-surface";
                             })
      .def("__repr__", [](const Mesh& mm) {
        return "<Mesh " + std::to_string(mm.n_vertices()) + " vertices, " +
               std::to_string(mm.n_triangles()) + " triangles>";
      });

  m.def("make_icosahedron", &make_icosahedron, py::arg("circumradius") = 1.0);
  m.def("refine_uniform", &refine_uniform, py::arg("mesh"), py::arg("levels"),
        py::arg("project_to_sphere") = false);
  m.def("make_screen", &make_screen, py::arg("n"));
  m.def("validate_mesh", &validate_mesh);
  m.def("mesh_stats", [](const Mesh& mesh) {
    MeshStats s = mesh_stats(mesh);
    py::dict d;
    d["diameter"] = s.diameter;
    d["h_max"] = s.h_max;
    d["h_min"] = s.h_min;
    d["total_area"] = s.total_area;
    return d;
  });
  m.def("write_mesh", &write_mesh);
  m.def("read_mesh", &read_mesh);

  py::class_<TemporalGrid>(m, "TemporalGrid")
      .def_readonly("dt", &TemporalGrid::dt)
      .def_readonly("n_steps", &TemporalGrid::n_steps)
      .def_readonly("t_final", &TemporalGrid::t_final);
  m.def("make_temporal_grid", &make_temporal_grid, py::arg("dt"), py::arg("t_final"));

  py::class_<TemporalBasis>(m, "TemporalBasis")
      .def(py::init<int, TemporalGrid>(), py::arg("degree"), py::arg("grid"))
      .def_property_readonly("degree", &TemporalBasis::degree)
      .def_property_readonly("grid", &TemporalBasis::grid)
      .def("shape", &TemporalBasis::shape);

  py::class_<PiecewisePolynomial>(m, "PiecewisePolynomial")
      .def("__call__", &PiecewisePolynomial::operator())
      .def_property_readonly("breakpoints", &PiecewisePolynomial::breakpoints)
      .def_property_readonly("degree", &PiecewisePolynomial::degree)
      .def("integral", &PiecewisePolynomial::integral);

  py::enum_<CorrelationVariant>(m, "CorrelationVariant")
      .value("interior", CorrelationVariant::interior)
      .value("first", CorrelationVariant::first)
      .value("last", CorrelationVariant::last);
  m.def("temporal_correlation", &temporal_correlation, py::arg("k"), py::arg("basis"),
        py::arg("variant") = CorrelationVariant::interior, py::arg("t_cap") = -1.0);

  py::class_<Enrichment>(m, "Enrichment")
      .def(py::init([](std::vector<Eigen::Vector3d> ks, std::vector<double> phases) {
             Enrichment e;
             e.wave_vectors = std::move(ks);
             e.phases = std::move(phases);
             return e;
           }),
           py::arg("wave_vectors"), py::arg("phases"))
      .def_property_readonly("size", &Enrichment::size)
      .def("frequency", &Enrichment::frequency);
  m.def("default_enrichment", &default_enrichment, py::arg("count"), py::arg("wave_number"));
  m.def("eval_enrichment", &eval_enrichment);

  py::class_<QuadratureConfig>(m, "QuadratureConfig")
      .def(py::init<>())
      .def_readwrite("outer_degree", &QuadratureConfig::outer_degree)
      .def_readwrite("radial_order", &QuadratureConfig::radial_order)
      .def_readwrite("angular_order", &QuadratureConfig::angular_order)
      .def_readwrite("grading_ratio", &QuadratureConfig::grading_ratio)
      .def_readwrite("grading_depth", &QuadratureConfig::grading_depth)
      .def_readwrite("rhs_time_order", &QuadratureConfig::rhs_time_order)
      .def_readwrite("time_order", &QuadratureConfig::time_order)
      .def_property(
          "radial_rule",
          [](const QuadratureConfig& q) {
            return q.radial_rule == RadialRule::analytic ? "analytic" : "graded-gauss";
          },
          [](QuadratureConfig& q, const std::string& v) {
            q.radial_rule = (v == "analytic") ? RadialRule::analytic : RadialRule::graded_gauss;
          });

  py::class_<RhsPreset>(m, "RhsPreset")
      .def_readonly("name", &RhsPreset::name)
      .def_readonly("omega_f", &RhsPreset::omega_f)
      .def_readonly("k_f", &RhsPreset::k_f)
      .def_readonly("has_exact", &RhsPreset::has_exact)
      .def("__call__",
           [](const RhsPreset& p, double t, const Eigen::Vector3d& x) { return p.f(t, x); })
      .def("exact_density", [](const RhsPreset& p, double t, const Eigen::Vector3d& x) {
        if (!p.has_exact) throw std::runtime_error("preset has no exact density");
        return p.exact_density(t, x);
      });
  m.def("rhs_preset", [](const std::string& name) { return make_rhs_preset(name); });
  m.def("rhs_preset", [](const std::string& name, const Eigen::Vector3d& k) {
    return make_rhs_preset(name, &k);
  });

  m.def("band_cutoff", &band_cutoff);
  m.def(
      "assemble_band",
      [](const Mesh& mesh, const TemporalBasis& tb, int k, const QuadratureConfig& quad) {
        SpatialBasis sp{&mesh};
        return assemble_band(mesh, sp, tb, k, quad);
      },
      py::arg("mesh"), py::arg("tb"), py::arg("k"), py::arg("quad") = QuadratureConfig());
  m.def(
      "assemble_all_bands",
      [](const Mesh& mesh, const TemporalBasis& tb, const QuadratureConfig& quad) {
        SpatialBasis sp{&mesh};
        return assemble_all_bands(mesh, sp, tb, quad);
      },
      py::arg("mesh"), py::arg("tb"), py::arg("quad") = QuadratureConfig());
  m.def(
      "assemble_rhs",
      [](const py::object& f, const Mesh& mesh, const TemporalBasis& tb,
         const QuadratureConfig& quad) {
        SpatialBasis sp{&mesh};
        return assemble_rhs(wrap_fn(f), mesh, sp, tb, quad);
      },
      py::arg("f"), py::arg("mesh"), py::arg("tb"), py::arg("quad") = QuadratureConfig());
  m.def(
      "assemble_band_enriched",
      [](const Mesh& mesh, const TemporalBasis& tb, const Enrichment& e, int k,
         const QuadratureConfig& quad) {
        SpatialBasis sp{&mesh};
        return assemble_band_enriched(mesh, sp, tb, e, k, quad);
      },
      py::arg("mesh"), py::arg("tb"), py::arg("enrichment"), py::arg("k"),
      py::arg("quad") = QuadratureConfig());
  m.def(
      "oracle_entry",
      [](const Mesh& mesh, int ti, int tj, int k, const TemporalBasis& tb, int depth) {
        return oracle_entry(mesh, ti, tj, k, tb, depth);
      },
      py::arg("mesh"), py::arg("ti"), py::arg("tj"), py::arg("k"), py::arg("tb"),
      py::arg("depth"));
  m.def("oracle_entry_reduced", &oracle_entry_reduced, py::arg("mesh"), py::arg("ti"),
        py::arg("tj"), py::arg("k"), py::arg("tb"), py::arg("rel_tol") = 1e-8);

  py::class_<SpaceTimeSystem>(m, "SpaceTimeSystem")
      .def(py::init([](std::vector<Eigen::MatrixXd> bands, int n_steps, Eigen::MatrixXd rhs) {
             SpaceTimeSystem sys;
             sys.bands = std::move(bands);
             sys.n_steps = n_steps;
             sys.n_dof = sys.bands.empty() ? 0 : static_cast<int>(sys.bands[0].rows());
             sys.rhs = std::move(rhs);
             sys.validate();
             return sys;
           }),
           py::arg("bands"), py::arg("n_steps"), py::arg("rhs"))
      .def_readonly("n_steps", &SpaceTimeSystem::n_steps)
      .def_readonly("n_dof", &SpaceTimeSystem::n_dof)
      .def_property_readonly("n_bands_max", &SpaceTimeSystem::n_bands_max)
      .def("band", &SpaceTimeSystem::band, py::return_value_policy::reference_internal)
      .def_property_readonly("rhs", [](const SpaceTimeSystem& s) { return s.rhs; })
      .def("rhs_flat", &SpaceTimeSystem::rhs_flat);

  py::class_<TriangularSystem>(m, "TriangularSystem")
      .def_property_readonly("n_bands_max", &TriangularSystem::n_bands_max)
      .def("band", &TriangularSystem::band, py::return_value_policy::reference_internal);

  m.def("matvec", &matvec);
  m.def("build_preconditioner", &build_preconditioner);
  m.def("forward_substitute", &forward_substitute);
  m.def("energy", &energy);
  m.def("to_dense", &to_dense);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("solution", &SolveReport::solution)
      .def_readonly("residual_history_plain", &SolveReport::residual_history_plain)
      .def_readonly("residual_history_prec", &SolveReport::residual_history_prec)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("hit_max_iterations", &SolveReport::hit_max_iterations)
      .def_readonly("energy", &SolveReport::energy)
      .def_readonly("wall_time_s", &SolveReport::wall_time_s);

  m.def(
      "gmres_solve",
      [](const SpaceTimeSystem& sys, double tolerance, int max_iterations,
         const TriangularSystem* precond) {
        SolverConfig cfg;
        cfg.tolerance = tolerance;
        cfg.max_iterations = max_iterations;
        cfg.mode = precond ? SolverMode::preconditioned_gmres : SolverMode::gmres;
        return gmres_solve(sys, cfg, precond);
      },
      py::arg("sys"), py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 300,
      py::arg("precond") = nullptr);
  m.def("standalone_solve", &standalone_solve);

  m.def(
      "l2_density_error",
      [](const Eigen::VectorXd& c, const py::object& exact, const Mesh& mesh,
         const TemporalBasis& tb) { return l2_density_error(c, wrap_fn(exact), mesh, tb); },
      py::arg("c"), py::arg("exact"), py::arg("mesh"), py::arg("tb"));
  m.def(
      "space_time_l2_norm",
      [](const py::object& f, const Mesh& mesh, const TemporalBasis& tb) {
        return space_time_l2_norm(wrap_fn(f), mesh, tb);
      },
      py::arg("f"), py::arg("mesh"), py::arg("tb"));
  m.def("eval_pressure", &eval_pressure, py::arg("c"), py::arg("mesh"), py::arg("tb"),
        py::arg("points"), py::arg("times"), py::arg("space_degree") = 6);
  m.def("convergence_rate", &convergence_rate);

  m.def("parse_run_config", &parse_run_config);
  m.def("run_example", [](const std::string& config_path) {
    RunConfig cfg = parse_run_config(config_path);
    RunResult res = run_example(cfg);
    py::dict d;
    d["output_dir"] = res.output_dir;
    d["n_dof_space"] = res.n_dof_space;
    d["n_steps"] = res.n_steps;
    d["total_dof"] = res.total_dof;
    d["cfl"] = res.cfl;
    py::dict reports;
    for (const auto& [name, rep] : res.reports) {
      py::dict r;
      r["iterations"] = rep.iterations;
      r["converged"] = rep.converged;
      r["energy"] = rep.energy;
      r["final_plain_residual"] = rep.final_plain_residual();
      reports[name.c_str()] = r;
    }
    d["reports"] = reports;
    if (res.l2_error >= 0.0) d["relative_l2_error"] = res.l2_error;
    return d;
  });
}
