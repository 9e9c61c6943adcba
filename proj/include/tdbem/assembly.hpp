#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tdbem/basis.hpp"
#include "tdbem/mesh.hpp"

namespace tdbem {

enum class RadialRule {
  graded_gauss,  // composite Gauss in rho, graded toward the singular radius
  analytic       // exact radial integration via the kernel antiderivative
};

struct QuadratureConfig {
  int outer_degree = 5;         // triangle-rule degree for the x integral (7 points)
  int radial_order = 8;         // Gauss points per radial subinterval
  double grading_ratio = 0.25;  // geometric grading toward the singular radius
  int grading_depth = 6;
  int angular_order = 8;
  RadialRule radial_rule = RadialRule::graded_gauss;
  int oracle_depth = 4;         // default subdivision depth of the brute-force oracle
  int time_order = 4;           // base Gauss order for enriched time integrals
  int rhs_time_order = 8;       // Gauss order per dt-subinterval of the rhs
  int rhs_space_degree = 0;     // triangle-rule degree for the rhs (0: outer_degree);
                                // raise for spatially oscillatory data
  // composite refinement of the x integral: test-triangle patches whose
  // distance range to the ansatz triangle straddles a kernel breakpoint are
  // split 4-to-1 until the range fits between breakpoints, the patch spans
  // less than outer_span_fraction * dt, or outer_refine_depth is reached
  int outer_refine_depth = 4;
  double outer_span_fraction = 0.25;

  void validate() const;
};

using SpaceTimeFn = std::function<double(double, const Eigen::Vector3d&)>;

/// Largest retained band index: ceil(diameter/dt) + 2. Bands beyond it are
/// exactly zero (retardation support beyond the geometry).
int band_cutoff(double diameter, double dt);

/// Galerkin block of the retarded single-layer operator for one band index.
/// Entry (row j, col i) couples test triangle j to ansatz triangle i:
///   V^k_{ij} = int_{T_j} int_{T_i} psi_k(|x-y|) / (2 pi |x-y|) ds_y ds_x.
Eigen::MatrixXd assemble_band(const Mesh& mesh, const SpatialBasis& sp,
                              const TemporalBasis& tb, int k, const QuadratureConfig& quad);

/// All bands k = -1 .. band_cutoff; index 0 of the result holds k = -1.
std::vector<Eigen::MatrixXd> assemble_all_bands(const Mesh& mesh, const SpatialBasis& sp,
                                                const TemporalBasis& tb,
                                                const QuadratureConfig& quad);

/// Single entry V^k_{ij} (test triangle j, ansatz triangle i), for spot
/// checks against the oracles without assembling a full band.
double assemble_band_entry(const Mesh& mesh, int i, int j, int k, const TemporalBasis& tb,
                           const QuadratureConfig& quad);

/// Right-hand-side blocks f_n^j = int int f(t,x) d/dt shape_n(t) ds_x dt,
/// returned as an n_dof x n_steps matrix (column n-1 holds f_n).
Eigen::MatrixXd assemble_rhs(const SpaceTimeFn& f, const Mesh& mesh, const SpatialBasis& sp,
                             const TemporalBasis& tb, const QuadratureConfig& quad);

/// Brute-force validation value of one entry: both triangles uniformly
/// subdivided 4^depth times, fixed Gauss on every sub-pair. Converges as
/// depth grows for separated pairs; touching pairs converge slowly and are
/// reported with the last-two-level error estimate.
double oracle_entry(const Mesh& mesh, int ti, int tj, int k, const TemporalBasis& tb,
                    int depth, const QuadratureConfig& quad = {});

struct OracleResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  int depth_used = 0;
};

/// Drives oracle_entry over increasing depths until the successive-level
/// difference meets the tolerance; reports non-convergence otherwise.
OracleResult oracle_entry_converged(const Mesh& mesh, int ti, int tj, int k,
                                    const TemporalBasis& tb, double rel_tol, int max_depth,
                                    const QuadratureConfig& quad = {});

/// Independent high-accuracy reference for arbitrary (incl. touching) pairs:
/// the inner integral is reduced to one dimension through the exact angular
/// measure of circle/triangle intersections and integrated adaptively; the
/// outer integral is refined uniformly until the requested tolerance holds.
double oracle_entry_reduced(const Mesh& mesh, int ti, int tj, int k, const TemporalBasis& tb,
                            double rel_tol = 1e-8);

/// Plane-wave-enriched band. DOF layout is enrichment-major: global index
/// a * n_triangles + i. Entry (row (b,j), col (a,i)) uses ansatz
/// shape_m(t) cos(w_a (t - m dt) - k_a.x + sigma_a) and the analogous test
/// function; the phase is referenced to each shape function's own node so
/// the band depends on m - n only.
Eigen::MatrixXd assemble_band_enriched(const Mesh& mesh, const SpatialBasis& sp,
                                       const TemporalBasis& tb, const Enrichment& e, int k,
                                       const QuadratureConfig& quad);

std::vector<Eigen::MatrixXd> assemble_all_bands_enriched(const Mesh& mesh,
                                                         const SpatialBasis& sp,
                                                         const TemporalBasis& tb,
                                                         const Enrichment& e,
                                                         const QuadratureConfig& quad);

/// Enriched right-hand side, (n_enr * n_dof) x n_steps.
Eigen::MatrixXd assemble_rhs_enriched(const SpaceTimeFn& f, const Mesh& mesh,
                                      const SpatialBasis& sp, const TemporalBasis& tb,
                                      const Enrichment& e, const QuadratureConfig& quad);

/// Integral over the triangle (a, b, c) of g(|x - y|) / (2 pi |x - y|) ds_y
/// for a piecewise-polynomial kernel g: the polar machinery shared by the
/// assembler and the field evaluation (exact radial integration, composite
/// Gauss in angle split at the kernel's breakpoint circles).
double single_layer_triangle_integral(const Eigen::Vector3d& x, const Eigen::Vector3d& a,
                                      const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                                      const PiecewisePolynomial& g, int angular_order = 8);

/// Space-time brute-force value of one enriched entry (time integral by fine
/// Gauss, spatial integrals by subdivision); test support for the enriched
/// assembler on separated pairs.
double oracle_entry_enriched(const Mesh& mesh, int ti, int tj, int k, const TemporalBasis& tb,
                             const Enrichment& e, int a, int b, int depth,
                             const QuadratureConfig& quad = {});

}  // namespace tdbem
