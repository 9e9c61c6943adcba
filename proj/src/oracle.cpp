#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polar_internal.hpp"
#include "tdbem/assembly.hpp"
#include "tdbem/quadrature.hpp"

namespace tdbem {

namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * M_PI);

struct SubTri {
  Eigen::Vector3d a, b, c;
  Eigen::Vector3d centroid;
  double bounding_radius;  // max distance centroid -> vertex
};

std::vector<SubTri> subdivide(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                              const Eigen::Vector3d& c, int depth) {
  std::vector<SubTri> cur = {{a, b, c, {}, 0.0}};
  for (int d = 0; d < depth; ++d) {
    std::vector<SubTri> next;
    next.reserve(cur.size() * 4);
    for (const auto& t : cur) {
      Eigen::Vector3d ab = 0.5 * (t.a + t.b), bc = 0.5 * (t.b + t.c), ca = 0.5 * (t.c + t.a);
      next.push_back({t.a, ab, ca, {}, 0.0});
      next.push_back({ab, t.b, bc, {}, 0.0});
      next.push_back({ca, bc, t.c, {}, 0.0});
      next.push_back({ab, bc, ca, {}, 0.0});
    }
    cur = std::move(next);
  }
  for (auto& t : cur) {
    t.centroid = (t.a + t.b + t.c) / 3.0;
    t.bounding_radius = std::max({(t.a - t.centroid).norm(), (t.b - t.centroid).norm(),
                                  (t.c - t.centroid).norm()});
  }
  return cur;
}

}  // namespace

double oracle_entry(const Mesh& mesh, int ti, int tj, int k, const TemporalBasis& tb, int depth,
                    const QuadratureConfig& quad) {
  if (depth < 0) throw std::invalid_argument("oracle_entry: depth must be >= 0");
  (void)quad;
  PiecewisePolynomial psi;
  if (tb.degree() == 0 && k < 0) return 0.0;
  psi = temporal_correlation(k, tb);
  if (psi.empty()) return 0.0;
  const double lo = psi.support_min(), hi = psi.support_max();

  auto inner_tris = subdivide(mesh.vertex_of(ti, 0), mesh.vertex_of(ti, 1), mesh.vertex_of(ti, 2), depth);
  auto outer_tris = subdivide(mesh.vertex_of(tj, 0), mesh.vertex_of(tj, 1), mesh.vertex_of(tj, 2), depth);

  const TriangleRule& near_rule = triangle_rule(8);
  const TriangleRule& far_rule = triangle_rule(4);

  double acc = 0.0;
  for (const auto& ta : inner_tris) {
    for (const auto& tb2 : outer_tris) {
      double dc = (ta.centroid - tb2.centroid).norm();
      double pad = ta.bounding_radius + tb2.bounding_radius;
      if (dc - pad >= hi || dc + pad <= lo) continue;  // support miss
      const TriangleRule& rule =
          (dc > 4.0 * pad + 1e-300) ? far_rule : near_rule;
      MappedTriangleRule qa = map_to_triangle(rule, ta.a, ta.b, ta.c);
      MappedTriangleRule qb = map_to_triangle(rule, tb2.a, tb2.b, tb2.c);
      double s = 0.0;
      for (size_t ia = 0; ia < qa.points.size(); ++ia)
        for (size_t ib = 0; ib < qb.points.size(); ++ib) {
          double r = (qa.points[ia] - qb.points[ib]).norm();
          if (r <= 0.0 || r <= lo || r >= hi) continue;
          s += qa.weights[ia] * qb.weights[ib] * psi(r) / r;
        }
      acc += s;
    }
  }
  return acc * kInv2Pi;
}

OracleResult oracle_entry_converged(const Mesh& mesh, int ti, int tj, int k,
                                    const TemporalBasis& tb, double rel_tol, int max_depth,
                                    const QuadratureConfig& quad) {
  OracleResult res;
  double prev = oracle_entry(mesh, ti, tj, k, tb, 0, quad);
  for (int d = 1; d <= max_depth; ++d) {
    double cur = oracle_entry(mesh, ti, tj, k, tb, d, quad);
    res.value = cur;
    res.error_estimate = std::abs(cur - prev);
    res.depth_used = d;
    double scale = std::max(std::abs(cur), 1e-14);
    if (res.error_estimate <= rel_tol * scale) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  res.converged = false;
  return res;
}

// ---------------------------------------------------------------------------
// reduced reference: exact circular angular measure + adaptive radial 1D

namespace {

double reduced_inner(const Eigen::Vector3d& x, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                     const Eigen::Vector3d& c, const PiecewisePolynomial& psi, double abs_tol) {
  detail::Fan fan = detail::build_fan(x, a, b, c);
  const double z = fan.z;
  const double hi = psi.support_max();
  if (hi <= z) return 0.0;
  double r_lo = std::max(psi.support_min(), z);
  double r_hi = std::min(hi, std::hypot(fan.rho_max, z));
  if (r_hi <= r_lo) return 0.0;

  // split radii: kernel breakpoints plus radii where the circle meets edge
  // feet or vertices (kinks of the angular measure)
  std::vector<double> splits = {r_lo, r_hi};
  for (double rb : psi.breakpoints())
    if (rb > r_lo && rb < r_hi) splits.push_back(rb);
  for (int si = 0; si < fan.n_sectors; ++si) {
    double rr = std::hypot(fan.sectors[si].p, z);
    if (rr > r_lo && rr < r_hi) splits.push_back(rr);
  }
  const Eigen::Vector3d* vs[3] = {&a, &b, &c};
  for (int i = 0; i < 3; ++i) {
    double rr = (*vs[i] - x).norm();
    if (rr > r_lo && rr < r_hi) splits.push_back(rr);
  }
  std::sort(splits.begin(), splits.end());

  auto integrand = [&](double r) {
    double rho = std::sqrt(std::max(0.0, r * r - z * z));
    return psi(r) * detail::fan_angular_measure(fan, rho);
  };
  double acc = 0.0;
  for (size_t i = 0; i + 1 < splits.size(); ++i) {
    if (splits[i + 1] - splits[i] <= 1e-15 * (1.0 + splits[i + 1])) continue;
    acc += adaptive_simpson(integrand, splits[i], splits[i + 1],
                            abs_tol / static_cast<double>(splits.size()));
  }
  return acc * kInv2Pi;
}

}  // namespace

double oracle_entry_reduced(const Mesh& mesh, int ti, int tj, int k, const TemporalBasis& tb,
                            double rel_tol) {
  if (tb.degree() == 0 && k < 0) return 0.0;
  PiecewisePolynomial psi = temporal_correlation(k, tb);
  if (psi.empty()) return 0.0;
  const Eigen::Vector3d ia = mesh.vertex_of(ti, 0), ib = mesh.vertex_of(ti, 1),
                        ic = mesh.vertex_of(ti, 2);

  // rough scale for the absolute tolerance of the inner integrals
  double area_j = mesh.triangle_area(tj);
  double psi_max = 0.0;
  for (size_t p = 0; p + 1 < psi.breakpoints().size(); ++p) {
    double m = 0.5 * (psi.breakpoints()[p] + psi.breakpoints()[p + 1]);
    psi_max = std::max(psi_max, std::abs(psi(m)));
  }
  double inner_tol = 1e-12 * std::max(1.0, psi_max * 2.0 * M_PI);

  const TriangleRule& rule = triangle_rule(8);
  double prev = 0.0;
  for (int depth = 0; depth <= 7; ++depth) {
    auto outer_tris = subdivide(mesh.vertex_of(tj, 0), mesh.vertex_of(tj, 1),
                                mesh.vertex_of(tj, 2), depth);
    double acc = 0.0;
    for (const auto& t : outer_tris) {
      MappedTriangleRule mq = map_to_triangle(rule, t.a, t.b, t.c);
      for (size_t q = 0; q < mq.points.size(); ++q)
        acc += mq.weights[q] * reduced_inner(mq.points[q], ia, ib, ic, psi, inner_tol);
    }
    if (depth > 0) {
      double scale = std::max(std::abs(acc), 1e-14 * area_j);
      if (std::abs(acc - prev) <= rel_tol * scale) return acc;
    }
    prev = acc;
  }
  return prev;
}

// ---------------------------------------------------------------------------
// enriched brute force (space subdivision x adaptive time quadrature)

double oracle_entry_enriched(const Mesh& mesh, int ti, int tj, int k, const TemporalBasis& tb,
                             const Enrichment& e, int a, int b, int depth,
                             const QuadratureConfig& quad) {
  (void)quad;
  if (tb.degree() != 1)
    throw std::invalid_argument("oracle_entry_enriched: requires temporal degree 1");
  const double dt = tb.dt();
  const double omega_a = e.frequency(a), omega_b = e.frequency(b);
  const Eigen::Vector3d ka = e.wave_vectors[a], kb = e.wave_vectors[b];
  const double sa = e.phases[a], sb = e.phases[b];

  auto inner_tris = subdivide(mesh.vertex_of(ti, 0), mesh.vertex_of(ti, 1), mesh.vertex_of(ti, 2), depth);
  auto outer_tris = subdivide(mesh.vertex_of(tj, 0), mesh.vertex_of(tj, 1), mesh.vertex_of(tj, 2), depth);
  const TriangleRule& rule = triangle_rule(6);

  auto hat = [dt](double s) {
    double u = std::abs(s) / dt;
    return u < 1.0 ? 1.0 - u : 0.0;
  };

  double acc = 0.0;
  for (const auto& tin : inner_tris) {
    MappedTriangleRule qa = map_to_triangle(rule, tin.a, tin.b, tin.c);
    for (const auto& tout : outer_tris) {
      MappedTriangleRule qb = map_to_triangle(rule, tout.a, tout.b, tout.c);
      for (size_t iy = 0; iy < qa.points.size(); ++iy) {
        const Eigen::Vector3d& y = qa.points[iy];
        double phase_y = -ka.dot(y) + sa;
        for (size_t ix = 0; ix < qb.points.size(); ++ix) {
          const Eigen::Vector3d& x = qb.points[ix];
          double r = (x - y).norm();
          if (r <= 0.0) continue;
          double shift = r - k * dt;
          double lo = std::max(-dt, shift - dt), hi = std::min(dt, shift + dt);
          if (hi <= lo) continue;
          double phase_x = -kb.dot(x) + sb;
          auto f = [&](double tau) {
            double sarg = tau - shift;
            double ansatz = hat(sarg) * std::cos(omega_a * sarg + phase_y);
            double htp = (tau < 0.0 ? 1.0 : -1.0) / dt;
            double test = htp * std::cos(omega_b * tau + phase_x) -
                          omega_b * hat(tau) * std::sin(omega_b * tau + phase_x);
            return ansatz * test;
          };
          double tint = 0.0;
          double cuts[4] = {lo, std::clamp(0.0, lo, hi), std::clamp(shift, lo, hi), hi};
          std::sort(cuts, cuts + 4);
          for (int ci = 0; ci + 1 < 4; ++ci)
            if (cuts[ci + 1] - cuts[ci] > 1e-15 * dt)
              tint += adaptive_simpson(f, cuts[ci], cuts[ci + 1], 1e-13);
          acc += qa.weights[iy] * qb.weights[ix] * tint / r;
        }
      }
    }
  }
  return acc * kInv2Pi;
}

}  // namespace tdbem
