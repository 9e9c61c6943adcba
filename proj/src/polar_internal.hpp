#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace tdbem::detail {

// Signed fan decomposition of a triangle about the in-plane projection of an
// evaluation point. Each edge spans a sector swept from the first vertex
// direction by a signed angle; sectors with the projection on the edge line
// are degenerate and dropped.
struct Sector {
  double theta_u = 0.0;     // direction angle of the first edge vertex
  double dtheta = 0.0;      // signed sweep to the second vertex, |dtheta| < pi
  double p = 0.0;           // distance from the projection to the edge line
  double theta_foot = 0.0;  // direction angle of the perpendicular foot
};

struct Fan {
  Eigen::Vector3d origin;  // projection of x onto the triangle plane
  Eigen::Vector3d e1, e2;  // in-plane orthonormal frame
  double z = 0.0;          // distance from x to the plane
  int n_sectors = 0;
  Sector sectors[3];
  double rho_max = 0.0;    // max vertex distance from the projection
};

inline double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

inline Fan build_fan(const Eigen::Vector3d& x, const Eigen::Vector3d& a,
                     const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  Fan f;
  Eigen::Vector3d n = (b - a).cross(c - a);
  n.normalize();
  double zs = (x - a).dot(n);
  f.origin = x - zs * n;
  f.z = std::abs(zs);
  f.e1 = (b - a).normalized();
  f.e2 = n.cross(f.e1);
  Eigen::Vector2d P[3];
  const Eigen::Vector3d* vs[3] = {&a, &b, &c};
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d d = *vs[i] - f.origin;
    P[i] = Eigen::Vector2d(d.dot(f.e1), d.dot(f.e2));
    f.rho_max = std::max(f.rho_max, P[i].norm());
  }
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector2d& u = P[e];
    const Eigen::Vector2d& v = P[(e + 1) % 3];
    double cross = u.x() * v.y() - u.y() * v.x();
    double scale = u.norm() * v.norm();
    if (scale <= 0.0 || std::abs(cross) <= 1e-14 * scale) continue;
    Sector s;
    s.theta_u = std::atan2(u.y(), u.x());
    s.dtheta = wrap_angle(std::atan2(v.y(), v.x()) - s.theta_u);
    Eigen::Vector2d ev = v - u;
    Eigen::Vector2d foot = u - (u.dot(ev) / ev.squaredNorm()) * ev;
    s.p = foot.norm();
    s.theta_foot = std::atan2(foot.y(), foot.x());
    f.sectors[f.n_sectors++] = s;
  }
  return f;
}

// distance from x to the plane point at angle theta on the sector's edge line
inline double sector_rho_edge(const Sector& s, double theta) {
  return s.p / std::cos(theta - s.theta_foot);
}

// Angular measure of the circle of radius rho (about the fan origin, in the
// triangle plane) lying inside the triangle. Exact up to the arccos calls.
inline double fan_angular_measure(const Fan& fan, double rho) {
  if (rho <= 0.0) return 0.0;
  double total = 0.0;
  for (int i = 0; i < fan.n_sectors; ++i) {
    const Sector& s = fan.sectors[i];
    double span = std::abs(s.dtheta);
    double inside = span;
    if (rho > s.p) {
      double phi = std::acos(std::min(1.0, s.p / rho));
      double g0 = wrap_angle(s.theta_u - s.theta_foot);
      double g1 = g0 + s.dtheta;
      double lo = std::min(g0, g1), hi = std::max(g0, g1);
      double ex = std::max(0.0, std::min(hi, phi) - std::max(lo, -phi));
      inside = (hi - lo) - ex;
    }
    total += (s.dtheta >= 0.0 ? 1.0 : -1.0) * inside;
  }
  return std::max(0.0, total);
}

}  // namespace tdbem::detail
