#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace tdbem {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule1d {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Returns the n-point Gauss-Legendre rule on [-1, 1]; rules are cached.
const GaussRule1d& gauss_legendre(int n);

/// Quadrature rule on the reference triangle {(u,v): u,v >= 0, u+v <= 1},
/// weights normalized to sum to 1 (multiply by the physical triangle area).
struct TriangleRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  int degree = 0;
  int size() const { return static_cast<int>(points.size()); }
};

/// Smallest available symmetric rule exact for polynomials of the given
/// total degree. Degrees above 8 fall back to a collapsed tensor rule.
const TriangleRule& triangle_rule(int degree);

/// Physical quadrature points/weights for a triangle given its vertices.
/// Weights include the triangle area.
struct MappedTriangleRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
};
MappedTriangleRule map_to_triangle(const TriangleRule& rule, const Eigen::Vector3d& a,
                                   const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/// Adaptive Simpson integration of f on [a, b] to an absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 40);

}  // namespace tdbem
