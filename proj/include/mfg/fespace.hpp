#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "mfg/mesh.hpp"

namespace mfg {

using Vector = Eigen::VectorXd;
using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;

/// Marks a boundary vertex in dof maps.
inline constexpr int kBoundaryDof = -1;

/// Nodal P1 space with homogeneous Dirichlet conditions.
///
/// Interior vertices are numbered 0..num_dofs()-1 in increasing vertex order;
/// boundary vertices carry no dof. Per-element basis gradients and areas are
/// precomputed at construction.
class P1Space {
 public:
  explicit P1Space(MeshPtr mesh);

  const Mesh2D& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int num_dofs() const { return static_cast<int>(dof_vertices_.size()); }
  int num_elements() const { return mesh_->num_triangles(); }

  int dof_of_vertex(int v) const { return vertex_dofs_[v]; }
  int vertex_of_dof(int i) const { return dof_vertices_[i]; }
  const Triangle& elem_vertices(int t) const { return mesh_->triangle(t); }
  std::array<int, 3> elem_dofs(int t) const;
  /// Constant gradients of the three local nodal basis functions on element t.
  const std::array<Vec2, 3>& elem_grads(int t) const { return grads_[t]; }
  double elem_area(int t) const { return areas_[t]; }
  /// Physical point of the barycentric coordinates `bary` in element t.
  Vec2 point(int t, const std::array<double, 3>& bary) const;

 private:
  MeshPtr mesh_;
  std::vector<int> vertex_dofs_;
  std::vector<int> dof_vertices_;
  std::vector<std::array<Vec2, 3>> grads_;
  std::vector<double> areas_;
};

using SpacePtr = std::shared_ptr<const P1Space>;

/// Continuous piecewise affine function vanishing on the boundary.
struct P1Function {
  SpacePtr space;
  Vector coeffs;

  P1Function() = default;
  explicit P1Function(SpacePtr s);
  P1Function(SpacePtr s, Vector c);

  double vertex_value(int v) const;
  double eval(int t, const std::array<double, 3>& bary) const;
  Vec2 grad(int t) const;
};

P1Function interpolate(const SpacePtr& space, const ScalarFn& f);

/// Symmetric rule on the reference triangle; weights sum to one.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  ///< barycentric coordinates
  std::vector<double> weights;
  int degree = 0;
};

/// Positive-weight rule exact to at least `degree` (1..6). Degree 3 returns the
/// six-point degree-4 rule.
const QuadratureRule& quadrature(int degree);

inline constexpr int kDefaultQuadratureDegree = 4;

/// Integral of f over the element using `rule`.
double integrate_element(const P1Space& space, int t, const QuadratureRule& rule,
                         const ScalarFn& f);

/// CSV with header `vertex_index,x,y,value`; boundary vertices are written with value 0.
void write_function_csv(const P1Function& fn, std::ostream& out);

}  // namespace mfg
