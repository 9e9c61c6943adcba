#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tdbem/mesh.hpp"

namespace tdbem {

/// Piecewise polynomial in one variable with low per-interval degree.
/// Outside the breakpoint range it evaluates to 0 (OutsideMode::zero) or to
/// the clamped boundary values (OutsideMode::clamp, used for antiderivatives).
class PiecewisePolynomial {
 public:
  enum class OutsideMode { zero, clamp };

  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<double> breakpoints,
                      std::vector<std::vector<double>> coeffs,
                      OutsideMode mode = OutsideMode::zero);

  double operator()(double x) const;
  /// Antiderivative, continuous, equal to 0 at the first breakpoint and
  /// clamped to constants outside the support.
  PiecewisePolynomial antiderivative() const;
  /// Definite integral over [a, b].
  double integral(double a, double b) const;

  bool empty() const { return breakpoints_.size() < 2; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  int degree() const;
  double support_min() const { return empty() ? 0.0 : breakpoints_.front(); }
  double support_max() const { return empty() ? 0.0 : breakpoints_.back(); }

 private:
  std::vector<double> breakpoints_;              // size m+1, sorted
  std::vector<std::vector<double>> coeffs_;      // per interval, local monomial coeffs
  OutsideMode mode_ = OutsideMode::zero;
};

/// Uniform time grid on [0, t_final] extended to n_steps = ceil(t_final/dt)
/// full steps.
struct TemporalGrid {
  double dt = 0.0;
  int n_steps = 0;
  double t_final = 0.0;
};
TemporalGrid make_temporal_grid(double dt, double t_final);

/// Shape functions of degree q in time on a uniform grid. q = 1 are the
/// continuous hats peaking at m*dt (m >= 1, zero for t <= 0); q = 0 are the
/// characteristic functions of [(m-1)dt, m*dt).
class TemporalBasis {
 public:
  TemporalBasis(int degree, TemporalGrid grid);

  int degree() const { return degree_; }
  const TemporalGrid& grid() const { return grid_; }
  double dt() const { return grid_.dt; }
  int n_dof() const { return grid_.n_steps; }

  /// Value of the m-th shape function at time t.
  double shape(int m, double t) const;

 private:
  int degree_;
  TemporalGrid grid_;
};

enum class CorrelationVariant { interior, first, last };

/// The kernel psi_k(r) = int_0^inf shape_{n-k}(t - r) d/dt shape_n(t) dt as
/// an explicit piecewise polynomial of degree <= 2 in r. The interior
/// variant is translation invariant in n; `first` clips the functions at
/// t = 0, `last` truncates the pair adjacent to the final grid time at
/// t_cap (default: the grid end). k < -1 (q=1) resp. k < 0 (q=0) is
/// rejected: those bands vanish identically.
PiecewisePolynomial temporal_correlation(int k, const TemporalBasis& basis,
                                         CorrelationVariant variant = CorrelationVariant::interior,
                                         double t_cap = -1.0);

/// Piecewise-constant (p = 0) spatial basis: function i is the indicator of
/// triangle i.
struct SpatialBasis {
  const Mesh* mesh = nullptr;
  int n_dof() const { return mesh ? mesh->n_triangles() : 0; }
};

/// Travelling-plane-wave enrichment: factor cos(w_i t - k_i . x + sigma_i)
/// with w_i = |k_i|_2 and sigma_i in {0, pi/2}.
struct Enrichment {
  std::vector<Eigen::Vector3d> wave_vectors;
  std::vector<double> phases;

  int size() const { return static_cast<int>(wave_vectors.size()); }
  double frequency(int i) const { return wave_vectors[i].norm(); }
};

double eval_enrichment(const Enrichment& e, int i, double t, const Eigen::Vector3d& x);

/// Default enrichment family: the constant mode (k = 0, sigma = 0) followed
/// by cos/sin pairs of magnitude `wave_number` along a fixed sequence of
/// sphere directions. `count` is the total number of enrichment functions.
Enrichment default_enrichment(int count, double wave_number);

}  // namespace tdbem
