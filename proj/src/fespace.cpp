#include "mfg/fespace.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "mfg/errors.hpp"

namespace mfg {

P1Space::P1Space(MeshPtr mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw ConfigError("P1Space: null mesh");
  const Mesh2D& m = *mesh_;
  vertex_dofs_.assign(m.num_vertices(), kBoundaryDof);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.is_boundary_vertex(v)) {
      vertex_dofs_[v] = static_cast<int>(dof_vertices_.size());
      dof_vertices_.push_back(v);
    }
  }

  grads_.resize(m.num_triangles());
  areas_.resize(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(t);
    const double area = m.area(t);
    areas_[t] = area;
    for (int i = 0; i < 3; ++i) {
      const Vec2& pj = m.vertex(tri[(i + 1) % 3]);
      const Vec2& pk = m.vertex(tri[(i + 2) % 3]);
      // inward normal of the opposite edge scaled by 1/(2 area)
      grads_[t][i] = Vec2(pj.y() - pk.y(), pk.x() - pj.x()) / (2.0 * area);
    }
  }
}

std::array<int, 3> P1Space::elem_dofs(int t) const {
  const auto& tri = mesh_->triangle(t);
  return {vertex_dofs_[tri[0]], vertex_dofs_[tri[1]], vertex_dofs_[tri[2]]};
}

Vec2 P1Space::point(int t, const std::array<double, 3>& bary) const {
  const auto& tri = mesh_->triangle(t);
  return bary[0] * mesh_->vertex(tri[0]) + bary[1] * mesh_->vertex(tri[1]) +
         bary[2] * mesh_->vertex(tri[2]);
}

P1Function::P1Function(SpacePtr s) : space(std::move(s)), coeffs(Vector::Zero(space->num_dofs())) {}

P1Function::P1Function(SpacePtr s, Vector c) : space(std::move(s)), coeffs(std::move(c)) {
  if (coeffs.size() != space->num_dofs()) {
    throw ConfigError("P1Function: coefficient vector has " + std::to_string(coeffs.size()) +
                      " entries, space has " + std::to_string(space->num_dofs()) + " dofs");
  }
}

double P1Function::vertex_value(int v) const {
  const int d = space->dof_of_vertex(v);
  return d == kBoundaryDof ? 0.0 : coeffs[d];
}

double P1Function::eval(int t, const std::array<double, 3>& bary) const {
  const auto dofs = space->elem_dofs(t);
  double value = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (dofs[i] != kBoundaryDof) value += bary[i] * coeffs[dofs[i]];
  }
  return value;
}

Vec2 P1Function::grad(int t) const {
  const auto dofs = space->elem_dofs(t);
  const auto& g = space->elem_grads(t);
  Vec2 result = Vec2::Zero();
  for (int i = 0; i < 3; ++i) {
    if (dofs[i] != kBoundaryDof) result += coeffs[dofs[i]] * g[i];
  }
  return result;
}

P1Function interpolate(const SpacePtr& space, const ScalarFn& f) {
  P1Function fn(space);
  for (int i = 0; i < space->num_dofs(); ++i) {
    const int v = space->vertex_of_dof(i);
    const double value = f(space->mesh().vertex(v));
    if (!std::isfinite(value)) {
      throw NumericError("interpolate: non-finite value at vertex " + std::to_string(v));
    }
    fn.coeffs[i] = value;
  }
  return fn;
}

namespace {

QuadratureRule make_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  auto add3 = [&rule](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    rule.points.push_back({b, a, a});
    rule.points.push_back({a, b, a});
    rule.points.push_back({a, a, b});
    rule.weights.insert(rule.weights.end(), 3, w);
  };
  auto add6 = [&rule](double a, double b, double w) {
    const double c = 1.0 - a - b;
    for (const auto& p : {std::array<double, 3>{a, b, c}, {b, a, c}, {a, c, b}, {c, a, b},
                          {b, c, a}, {c, b, a}}) {
      rule.points.push_back(p);
      rule.weights.push_back(w);
    }
  };
  switch (degree) {
    case 1:
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      rule.weights.push_back(1.0);
      break;
    case 2:
      add3(1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      // Dunavant degree 4
      add3(0.44594849091596488632, 0.22338158967801146570);
      add3(0.09157621350977074346, 0.10995174365532186764);
      break;
    case 5:
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      rule.weights.push_back(9.0 / 40.0);
      add3((6.0 + std::sqrt(15.0)) / 21.0, (155.0 + std::sqrt(15.0)) / 1200.0);
      add3((6.0 - std::sqrt(15.0)) / 21.0, (155.0 - std::sqrt(15.0)) / 1200.0);
      break;
    case 6:
      add3(0.24928674517091042129, 0.11678627572637936603);
      add3(0.06308901449150222834, 0.05084490637020681692);
      add6(0.05314504984481694735, 0.31035245103378440542, 0.08285107561837357519);
      break;
    default:
      break;
  }
  return rule;
}

}  // namespace

const QuadratureRule& quadrature(int degree) {
  static const std::array<QuadratureRule, 6> rules = {make_rule(1), make_rule(2), make_rule(4),
                                                       make_rule(4), make_rule(5), make_rule(6)};
  if (degree < 1 || degree > 6) {
    throw ConfigError("quadrature: unsupported degree " + std::to_string(degree) +
                      " (supported: 1..6)");
  }
  return rules[degree - 1];
}

double integrate_element(const P1Space& space, int t, const QuadratureRule& rule,
                         const ScalarFn& f) {
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    sum += rule.weights[q] * f(space.point(t, rule.points[q]));
  }
  return sum * space.elem_area(t);
}

void write_function_csv(const P1Function& fn, std::ostream& out) {
  const Mesh2D& mesh = fn.space->mesh();
  const auto old_precision = out.precision();
  out << "vertex_index,x,y,value\n" << std::setprecision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2& p = mesh.vertex(v);
    out << v << ',' << p.x() << ',' << p.y() << ',' << fn.vertex_value(v) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace mfg
