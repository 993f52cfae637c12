#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mfg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Triangle = std::array<int, 3>;

/// Absolute tolerance for sign checks on cotangent sums and angle classification.
inline constexpr double kGeomTol = 1e-12;

struct Edge {
  int a = -1;  ///< lower vertex index
  int b = -1;  ///< higher vertex index
  std::array<int, 2> triangles{-1, -1};
  int num_triangles = 0;
  bool on_boundary() const { return num_triangles == 1; }
};

class Mesh2D;
using MeshPtr = std::shared_ptr<const Mesh2D>;

/// Conforming 2D triangulation. Immutable after construction.
///
/// Triangles are stored counterclockwise. Boundary vertices are the endpoints
/// of edges with a single adjacent triangle. A refined mesh keeps a pointer to
/// its parent together with the vertex and triangle lineage needed to inject
/// coarse P1 functions exactly.
class Mesh2D {
 public:
  /// Validates and normalizes the input: clockwise triangles are reoriented,
  /// zero-area triangles and non-manifold or inconsistently shared edges raise
  /// GeometryError.
  Mesh2D(std::vector<Vec2> vertices, std::vector<Triangle> triangles);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  /// Edge indices of triangle t; entry i is the edge opposite local vertex i.
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }

  const std::vector<bool>& boundary_vertex_flags() const { return boundary_; }
  bool is_boundary_vertex(int v) const { return boundary_[v]; }

  /// An edge touching at least one interior vertex.
  bool is_internal_edge(int e) const {
    return !boundary_[edges_[e].a] || !boundary_[edges_[e].b];
  }

  double area(int t) const;
  double diameter(int t) const;
  double inradius(int t) const;
  double edge_length(int e) const;
  /// Unit tangent from the lower-indexed to the higher-indexed vertex.
  Vec2 edge_tangent(int e) const;
  Vec2 centroid(int t) const;
  double total_area() const;

  int level() const { return level_; }
  const MeshPtr& parent() const { return parent_; }
  /// For a refined mesh: the two parent vertices whose midpoint is this vertex
  /// (equal indices for an inherited vertex). Empty for a root mesh.
  const std::vector<std::array<int, 2>>& vertex_lineage() const { return vertex_lineage_; }
  /// For a refined mesh: index of the parent triangle containing each child.
  const std::vector<int>& parent_triangles() const { return parent_triangle_; }

 private:
  friend MeshPtr refine_red(const MeshPtr& mesh);

  void build_connectivity();

  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<bool> boundary_;
  MeshPtr parent_;
  int level_ = 0;
  std::vector<std::array<int, 2>> vertex_lineage_;
  std::vector<int> parent_triangle_;
};

struct XzResult {
  bool satisfied = true;
  /// Minimum cotangent sum over edges shared by two triangles (+inf if none).
  double worst_sum = 0.0;
};

struct MeshQualityReport {
  double h_max = 0.0;
  double shape_regularity = 0.0;
  bool xz_satisfied = false;
  double xz_worst_edge_sum = 0.0;
  double acute_theta = 0.0;
};

/// Unit square, n x n cells, each split by its lower-left to upper-right diagonal.
MeshPtr generate_structured_square(int n);

/// Rhombus (0,0),(1,0),(3/2,sqrt3/2),(1/2,sqrt3/2) split into 2n^2 equilateral triangles.
MeshPtr generate_acute_rhombus(int n);

/// Midpoint (red) refinement: every triangle becomes four similar children.
MeshPtr refine_red(const MeshPtr& mesh);

/// For each edge shared by two triangles, sums cot of the two opposite angles.
XzResult check_xz(const Mesh2D& mesh);

/// pi/2 minus the largest interior angle, floored at zero.
double check_acute(const Mesh2D& mesh);

double mesh_size(const Mesh2D& mesh);
double shape_regularity(const Mesh2D& mesh);
MeshQualityReport mesh_quality(const Mesh2D& mesh);

enum class MeshFamily { XzSquare, AcuteRhombus };

/// Level-0 mesh of a family (a single cell), refined `level` times.
MeshPtr family_mesh(MeshFamily family, int level);
/// Meshes for levels 0..max_level, each the red refinement of the previous.
std::vector<MeshPtr> refinement_hierarchy(MeshPtr base, int max_level);

MeshPtr read_mesh(const std::string& path);
MeshPtr read_mesh(std::istream& in);
void write_mesh(const Mesh2D& mesh, const std::string& path);
void write_mesh(const Mesh2D& mesh, std::ostream& out);

}  // namespace mfg
