#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tdbem/assembly.hpp"
#include "tdbem/basis.hpp"
#include "tdbem/mesh.hpp"

namespace tdbem {

struct ErrorReport {
  double l2_density_error = 0.0;
  double relative_l2_error = 0.0;
  double energy_rel_error = 0.0;
  double convergence_rate = 0.0;
};

/// L^2([0,T] x Gamma) distance between the exact density and the discrete
/// density reconstructed from c (piecewise-constant space, shape functions
/// of degree q in time). Quadrature orders: >= 4 points per dt-subinterval
/// in time, degree >= 4 in space.
double l2_density_error(const Eigen::VectorXd& c, const SpaceTimeFn& exact, const Mesh& mesh,
                        const TemporalBasis& tb, int time_order = 6, int space_degree = 4);

/// Same quadrature applied to the exact density alone (denominator of
/// relative errors).
double space_time_l2_norm(const SpaceTimeFn& f, const Mesh& mesh, const TemporalBasis& tb,
                          int time_order = 6, int space_degree = 4);

/// Off-surface sound pressure via the single-layer representation,
/// u(t,x) = sum_{m,i} c_m^i int_{T_i} shape_m(t - |x-y|) / (2 pi |x-y|) ds_y.
/// Points closer than h_min/10 to the surface are rejected.
Eigen::MatrixXd eval_pressure(const Eigen::VectorXd& c, const Mesh& mesh, const TemporalBasis& tb,
                              const std::vector<Eigen::Vector3d>& points,
                              const std::vector<double>& times, int space_degree = 6);

/// Least-squares slope of log(error) against log(h).
double convergence_rate(const std::vector<std::pair<double, double>>& h_error_pairs);

}  // namespace tdbem
