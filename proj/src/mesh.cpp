#include "tdbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tdbem {

double Mesh::triangle_area(int tri) const {
  const auto& t = triangles[tri];
  return 0.5 * ((vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]])).norm();
}

Eigen::Vector3d Mesh::triangle_centroid(int tri) const {
  const auto& t = triangles[tri];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

double Mesh::signed_volume() const {
  double v = 0.0;
  for (const auto& t : triangles)
    v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]])) / 6.0;
  return v;
}

Mesh make_icosahedron(double circumradius) {
  if (circumradius <= 0.0) throw std::invalid_argument("make_icosahedron: circumradius must be > 0");
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const double scale = circumradius / std::sqrt(1.0 + phi * phi);
  Mesh m;
  m.kind = MeshKind::closed_surface;
  const double coords[12][3] = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& c : coords)
    m.vertices.emplace_back(scale * c[0], scale * c[1], scale * c[2]);
  const int faces[20][3] = {
      {0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (const auto& f : faces) {
    std::array<int, 3> tri = {f[0], f[1], f[2]};
    // orient outward (convex body centred at the origin)
    Eigen::Vector3d n = (m.vertices[tri[1]] - m.vertices[tri[0]])
                            .cross(m.vertices[tri[2]] - m.vertices[tri[0]]);
    Eigen::Vector3d c = (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]) / 3.0;
    if (n.dot(c) < 0.0) std::swap(tri[1], tri[2]);
    m.triangles.push_back(tri);
  }
  return m;
}

Mesh refine_uniform(const Mesh& mesh, int levels, bool project_to_sphere) {
  if (levels < 0) throw std::invalid_argument("refine_uniform: levels must be >= 0");

  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
  if (project_to_sphere) {
    for (const auto& v : mesh.vertices) center += v;
    center /= static_cast<double>(mesh.n_vertices());
    double rmin = 1e300, rmax = 0.0;
    for (const auto& v : mesh.vertices) {
      double r = (v - center).norm();
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    if (rmax <= 0.0 || (rmax - rmin) > 1e-12 * rmax)
      throw std::invalid_argument(
          "refine_uniform: project_to_sphere requires vertices equidistant from the centroid");
    radius = 0.5 * (rmin + rmax);
  }

  Mesh cur = mesh;
  for (int level = 0; level < levels; ++level) {
    Mesh next;
    next.kind = cur.kind;
    next.vertices = cur.vertices;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Eigen::Vector3d p = 0.5 * (next.vertices[a] + next.vertices[b]);
      if (project_to_sphere) p = center + radius * (p - center).normalized();
      int idx = static_cast<int>(next.vertices.size());
      next.vertices.push_back(p);
      midpoint.emplace(key, idx);
      return idx;
    };
    for (const auto& t : cur.triangles) {
      int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.triangles.push_back({t[0], ab, ca});
      next.triangles.push_back({ab, t[1], bc});
      next.triangles.push_back({ca, bc, t[2]});
      next.triangles.push_back({ab, bc, ca});
    }
    cur = std::move(next);
  }
  return cur;
}

Mesh make_screen(int n) {
  if (n < 1) throw std::invalid_argument("make_screen: n must be >= 1");
  Mesh m;
  m.kind = MeshKind::screen;
  const double h = 0.5 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(i * h, j * h, 0.0);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int p00 = vid(i, j), p10 = vid(i + 1, j), p01 = vid(i, j + 1), p11 = vid(i + 1, j + 1);
      // same diagonal for every square
      m.triangles.push_back({p00, p10, p11});
      m.triangles.push_back({p00, p11, p01});
    }
  return m;
}

MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats s;
  s.h_min = 1e300;
  for (int i = 0; i < mesh.n_vertices(); ++i)
    for (int j = i + 1; j < mesh.n_vertices(); ++j)
      s.diameter = std::max(s.diameter, (mesh.vertices[i] - mesh.vertices[j]).norm());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    s.total_area += mesh.triangle_area(t);
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      double len = (mesh.vertices[tri[e]] - mesh.vertices[tri[(e + 1) % 3]]).norm();
      s.h_max = std::max(s.h_max, len);
      s.h_min = std::min(s.h_min, len);
    }
  }
  if (mesh.n_triangles() == 0) s.h_min = 0.0;
  return s;
}

void validate_mesh(const Mesh& mesh) {
  const int nv = mesh.n_vertices();
  if (mesh.n_triangles() == 0) throw std::runtime_error("mesh: no triangles");
  std::map<std::pair<int, int>, int> edge_count;
  std::map<std::pair<int, int>, int> directed_count;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw std::runtime_error("mesh: triangle with repeated vertex");
    for (int c = 0; c < 3; ++c)
      if (tri[c] < 0 || tri[c] >= nv) throw std::runtime_error("mesh: vertex index out of range");
    if (mesh.triangle_area(t) <= 0.0) throw std::runtime_error("mesh: degenerate triangle");
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      edge_count[std::minmax(a, b)]++;
      directed_count[{a, b}]++;
    }
  }
  if (mesh.kind == MeshKind::closed_surface) {
    for (const auto& [edge, count] : edge_count)
      if (count != 2) throw std::runtime_error("mesh: closed surface edge not shared by 2 triangles");
    for (const auto& [edge, count] : directed_count)
      if (count != 1) throw std::runtime_error("mesh: inconsistent orientation");
    if (mesh.signed_volume() <= 0.0) throw std::runtime_error("mesh: orientation not outward");
  } else {
    for (const auto& [edge, count] : edge_count)
      if (count != 1 && count != 2) throw std::runtime_error("mesh: non-manifold screen edge");
    bool has_boundary = false;
    for (const auto& [edge, count] : edge_count) has_boundary |= (count == 1);
    if (!has_boundary) throw std::runtime_error("mesh: screen without boundary edges");
  }
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh: cannot open " + path);
  out.precision(17);
  out << "tdbem-mesh 1 "
      << (mesh.kind == MeshKind::closed_surface ? "closed-surface" : "screen") << "\n";
  out << mesh.n_vertices() << " " << mesh.n_triangles() << "\n";
  for (const auto& v : mesh.vertices) out << v[0] << " " << v[1] << " " << v[2] << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_mesh: cannot open " + path);
  std::string magic, kind;
  int version = 0;
  in >> magic >> version >> kind;
  if (magic != "tdbem-mesh" || version != 1)
    throw std::runtime_error("read_mesh: bad header in " + path);
  Mesh m;
  m.kind = (kind == "screen") ? MeshKind::screen : MeshKind::closed_surface;
  int nv = 0, nt = 0;
  in >> nv >> nt;
  if (!in || nv <= 0 || nt <= 0) throw std::runtime_error("read_mesh: bad counts in " + path);
  m.vertices.resize(nv);
  for (auto& v : m.vertices) in >> v[0] >> v[1] >> v[2];
  m.triangles.resize(nt);
  for (auto& t : m.triangles) in >> t[0] >> t[1] >> t[2];
  if (!in) throw std::runtime_error("read_mesh: truncated file " + path);
  validate_mesh(m);
  return m;
}

double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  // Ericson-style region classification via barycentric coordinates.
  Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  Eigen::Vector3d bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }
  Eigen::Vector3d cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

namespace {

double segment_segment_distance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                                const Eigen::Vector3d& p2, const Eigen::Vector3d& q2) {
  Eigen::Vector3d d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  const double eps = 1e-30;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      double b = d1.dot(d2);
      double denom = a * e - b * b;
      if (denom > eps)
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

}  // namespace

DistanceRange triangle_pair_distance_range(const std::array<Eigen::Vector3d, 3>& t1,
                                           const std::array<Eigen::Vector3d, 3>& t2) {
  const auto& A = t1;
  const auto& B = t2;
  DistanceRange range;
  range.max = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) range.max = std::max(range.max, (A[a] - B[b]).norm());
  double dmin = 1e300;
  for (int a = 0; a < 3; ++a) {
    dmin = std::min(dmin, point_triangle_distance(A[a], B[0], B[1], B[2]));
    dmin = std::min(dmin, point_triangle_distance(B[a], A[0], A[1], A[2]));
    if (dmin == 0.0) break;
  }
  if (dmin > 0.0)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        dmin = std::min(dmin,
                        segment_segment_distance(A[a], A[(a + 1) % 3], B[b], B[(b + 1) % 3]));
  range.min = dmin;
  return range;
}

DistanceRange triangle_distance_range(const Mesh& mesh, int ti, int tj) {
  std::array<Eigen::Vector3d, 3> A, B;
  for (int c = 0; c < 3; ++c) {
    A[c] = mesh.vertex_of(ti, c);
    B[c] = mesh.vertex_of(tj, c);
  }
  if (ti == tj) {
    DistanceRange range;
    range.min = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) range.max = std::max(range.max, (A[a] - B[b]).norm());
    return range;
  }
  return triangle_pair_distance_range(A, B);
}

double point_mesh_distance(const Eigen::Vector3d& p, const Mesh& mesh) {
  double d = 1e300;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    d = std::min(d, point_triangle_distance(p, mesh.vertex_of(t, 0), mesh.vertex_of(t, 1),
                                            mesh.vertex_of(t, 2)));
  return d;
}

}  // namespace tdbem
