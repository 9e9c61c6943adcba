#include "tdbem/postprocess.hpp"

#include <cmath>
#include <stdexcept>

#include "tdbem/quadrature.hpp"

namespace tdbem {

namespace {

// discrete density on triangle i at time t
double density_at(const Eigen::VectorXd& c, int n_dof, const TemporalBasis& tb, int tri,
                  double t) {
  const double dt = tb.dt();
  const int n_steps = tb.grid().n_steps;
  double val = 0.0;
  if (tb.degree() == 1) {
    int m_lo = std::max(1, static_cast<int>(std::floor(t / dt)));
    int m_hi = std::min(n_steps, m_lo + 1);
    for (int m = m_lo; m <= m_hi; ++m) val += c[(m - 1) * n_dof + tri] * tb.shape(m, t);
  } else {
    int m = static_cast<int>(std::floor(t / dt)) + 1;
    if (m >= 1 && m <= n_steps) val += c[(m - 1) * n_dof + tri];
  }
  return val;
}

}  // namespace

double l2_density_error(const Eigen::VectorXd& c, const SpaceTimeFn& exact, const Mesh& mesh,
                        const TemporalBasis& tb, int time_order, int space_degree) {
  const int n_dof = mesh.n_triangles();
  if (c.size() != static_cast<long>(n_dof) * tb.grid().n_steps)
    throw std::invalid_argument("l2_density_error: dimension mismatch");
  const double dt = tb.dt();
  const double T = tb.grid().t_final;
  const GaussRule1d& gt = gauss_legendre(std::max(4, time_order));
  const TriangleRule& rule = triangle_rule(std::max(4, space_degree));

  double acc = 0.0;
  for (int tri = 0; tri < n_dof; ++tri) {
    MappedTriangleRule sq = map_to_triangle(rule, mesh.vertex_of(tri, 0), mesh.vertex_of(tri, 1),
                                            mesh.vertex_of(tri, 2));
    for (int seg = 0; seg * dt < T - 1e-14; ++seg) {
      double t0 = seg * dt;
      double t1 = std::min(t0 + dt, T);
      double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
      for (int g = 0; g < gt.size(); ++g) {
        double t = mid + half * gt.nodes[g];
        double wt = gt.weights[g] * half;
        double phi_h = density_at(c, n_dof, tb, tri, t);
        for (size_t q = 0; q < sq.points.size(); ++q) {
          double d = exact(t, sq.points[q]) - phi_h;
          acc += wt * sq.weights[q] * d * d;
        }
      }
    }
  }
  return std::sqrt(acc);
}

double space_time_l2_norm(const SpaceTimeFn& f, const Mesh& mesh, const TemporalBasis& tb,
                          int time_order, int space_degree) {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<long>(mesh.n_triangles()) *
                                               tb.grid().n_steps);
  return l2_density_error(zero, f, mesh, tb, time_order, space_degree);
}

namespace {

// the retarded shape function r -> shape_m(t - r) as an explicit piecewise
// polynomial in r, clipped to r >= 0
PiecewisePolynomial retarded_shape_poly(int degree, double alpha, double dt) {
  std::vector<double> breaks;
  std::vector<std::vector<double>> coeffs;
  if (degree == 1) {
    // hat0(alpha - r): rises on [alpha - dt, alpha], falls on [alpha, alpha + dt]
    const double pieces[2][3] = {{alpha - dt, alpha, 1.0 / dt}, {alpha, alpha + dt, -1.0 / dt}};
    for (const auto& p : pieces) {
      double lo = std::max(p[0], 0.0), hi = p[1];
      if (hi - lo <= 1e-14 * dt) continue;
      double v_lo = 1.0 - std::abs(alpha - lo) / dt;
      if (breaks.empty()) breaks.push_back(lo);
      coeffs.push_back({v_lo, p[2]});
      breaks.push_back(hi);
    }
  } else {
    // indicator of t - r in [(m-1)dt, m dt), i.e. r in (alpha, alpha + dt]
    double lo = std::max(alpha, 0.0), hi = alpha + dt;
    if (hi - lo > 1e-14 * dt) {
      breaks = {lo, hi};
      coeffs = {{1.0}};
    }
  }
  if (coeffs.empty()) return {};
  return PiecewisePolynomial(std::move(breaks), std::move(coeffs));
}

}  // namespace

Eigen::MatrixXd eval_pressure(const Eigen::VectorXd& c, const Mesh& mesh, const TemporalBasis& tb,
                              const std::vector<Eigen::Vector3d>& points,
                              const std::vector<double>& times, int space_degree) {
  const int n_dof = mesh.n_triangles();
  const int n_steps = tb.grid().n_steps;
  const double dt = tb.dt();
  if (c.size() != static_cast<long>(n_dof) * n_steps)
    throw std::invalid_argument("eval_pressure: dimension mismatch");
  const double h_min = mesh_stats(mesh).h_min;
  for (const auto& p : points)
    if (point_mesh_distance(p, mesh) < h_min / 10.0)
      throw std::invalid_argument("eval_pressure: point too close to the surface");

  const int angular_order = std::max(4, space_degree);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<long>(points.size()), times.size());
  for (size_t pi = 0; pi < points.size(); ++pi) {
    const Eigen::Vector3d& x = points[pi];
    for (int tri = 0; tri < n_dof; ++tri) {
      const Eigen::Vector3d a = mesh.vertex_of(tri, 0);
      const Eigen::Vector3d b = mesh.vertex_of(tri, 1);
      const Eigen::Vector3d cc = mesh.vertex_of(tri, 2);
      double d_lo = point_triangle_distance(x, a, b, cc);
      double d_hi = std::max({(x - a).norm(), (x - b).norm(), (x - cc).norm()});
      for (size_t si = 0; si < times.size(); ++si) {
        const double t = times[si];
        // shape m reaches the triangle when t - m dt is within [d_lo-dt, d_hi+dt]
        int m_lo = std::max(1, static_cast<int>(std::ceil((t - d_hi) / dt)) - 1);
        int m_hi = std::min(n_steps, static_cast<int>(std::floor((t - d_lo) / dt)) + 1);
        for (int m = m_lo; m <= m_hi; ++m) {
          double coeff = c[(m - 1) * n_dof + tri];
          if (coeff == 0.0) continue;
          PiecewisePolynomial ker = retarded_shape_poly(tb.degree(), t - m * dt, dt);
          if (ker.empty()) continue;
          out(pi, si) += coeff * single_layer_triangle_integral(x, a, b, cc, ker, angular_order);
        }
      }
    }
  }
  return out;
}

double convergence_rate(const std::vector<std::pair<double, double>>& h_error_pairs) {
  if (h_error_pairs.size() < 2)
    throw std::invalid_argument("convergence_rate: needs at least 2 pairs");
  for (size_t i = 0; i + 1 < h_error_pairs.size(); ++i)
    if (!(h_error_pairs[i].first > h_error_pairs[i + 1].first))
      throw std::invalid_argument("convergence_rate: h must be strictly decreasing");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h_error_pairs.size());
  for (const auto& [h, err] : h_error_pairs) {
    if (!(err > 0.0)) throw std::invalid_argument("convergence_rate: errors must be positive");
    double x = std::log(h), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tdbem
