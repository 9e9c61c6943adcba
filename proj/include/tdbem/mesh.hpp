#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace tdbem {

enum class MeshKind { closed_surface, screen };

/// Triangulated surface. Immutable after construction; geometry queries are
/// const and safe to share across threads.
struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
  MeshKind kind = MeshKind::closed_surface;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  Eigen::Vector3d vertex_of(int tri, int corner) const {
    return vertices[triangles[tri][corner]];
  }
  double triangle_area(int tri) const;
  Eigen::Vector3d triangle_centroid(int tri) const;
  /// Signed volume enclosed by the surface (divergence theorem); only
  /// meaningful for closed surfaces.
  double signed_volume() const;
};

struct MeshStats {
  double diameter = 0.0;    // max pairwise vertex distance
  double h_max = 0.0;       // longest edge
  double h_min = 0.0;       // shortest edge
  double total_area = 0.0;
};

/// Regular icosahedron with the given circumradius, centred at the origin,
/// faces oriented outward.
Mesh make_icosahedron(double circumradius);

/// Uniform 4-to-1 refinement via edge midpoints. With project_to_sphere the
/// input must be inscribed in a sphere about its vertex centroid (relative
/// tolerance 1e-12); new vertices are projected radially onto that sphere.
Mesh refine_uniform(const Mesh& mesh, int levels, bool project_to_sphere = false);

/// n x n grid of squares on [0, 0.5]^2 x {z=0}, each split along the same
/// diagonal; 2*n^2 triangles, kind = screen.
Mesh make_screen(int n);

MeshStats mesh_stats(const Mesh& mesh);

/// Validates the structural invariants (index ranges, positive areas,
/// edge-manifoldness, orientation); throws std::runtime_error on violation.
void validate_mesh(const Mesh& mesh);

void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(const std::string& path);

/// Euclidean distance from a point to a (filled) triangle.
double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/// Range [d_min, d_max] of distances |x - y| between two triangles.
struct DistanceRange {
  double min = 0.0;
  double max = 0.0;
};
DistanceRange triangle_pair_distance_range(const std::array<Eigen::Vector3d, 3>& t1,
                                           const std::array<Eigen::Vector3d, 3>& t2);
DistanceRange triangle_distance_range(const Mesh& mesh, int ti, int tj);

/// Distance from a point to the whole surface.
double point_mesh_distance(const Eigen::Vector3d& p, const Mesh& mesh);

}  // namespace tdbem
