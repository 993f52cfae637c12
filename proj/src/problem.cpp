#include "mfg/problem.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "mfg/errors.hpp"

namespace mfg {

std::string to_string(Domain domain) {
  switch (domain) {
    case Domain::UnitSquare:
      return "unit_square";
    case Domain::Rhombus:
      return "rhombus";
    case Domain::Other:
      return "other";
  }
  return "unknown";
}

namespace {

// Maps physical coordinates to the unit-square parameters of the domain.
Mat2 parameter_map(Domain domain) {
  switch (domain) {
    case Domain::UnitSquare:
      return Mat2::Identity();
    case Domain::Rhombus: {
      Mat2 j;
      j << 1.0, -1.0 / std::numbers::sqrt3, 0.0, 2.0 / std::numbers::sqrt3;
      return j;
    }
    case Domain::Other:
      break;
  }
  throw ConfigError("sine_product: no parameterization for domain '" + to_string(domain) + "'");
}

}  // namespace

ExactField sine_product(Domain domain) {
  const Mat2 j = parameter_map(domain);
  const Mat2 jjt = j * j.transpose();
  constexpr double pi = std::numbers::pi;
  ExactField f;
  f.value = [j](const Vec2& x) {
    const Vec2 s = j * x;
    return std::sin(pi * s.x()) * std::sin(pi * s.y());
  };
  f.grad = [j](const Vec2& x) -> Vec2 {
    const Vec2 s = j * x;
    const Vec2 ds(pi * std::cos(pi * s.x()) * std::sin(pi * s.y()),
                  pi * std::sin(pi * s.x()) * std::cos(pi * s.y()));
    return j.transpose() * ds;
  };
  f.laplacian = [j, jjt](const Vec2& x) {
    const Vec2 s = j * x;
    const double u = std::sin(pi * s.x()) * std::sin(pi * s.y());
    const double cross = pi * pi * std::cos(pi * s.x()) * std::cos(pi * s.y());
    // trace(J^T Hess_s J) = sum_ab Hess_s(a,b) (J J^T)(a,b)
    return -pi * pi * u * (jjt(0, 0) + jjt(1, 1)) + 2.0 * cross * jjt(0, 1);
  };
  return f;
}

ExactField zero_field() {
  ExactField f;
  f.value = [](const Vec2&) { return 0.0; };
  f.grad = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
  f.laplacian = [](const Vec2&) { return 0.0; };
  return f;
}

CouplingF local_linear_coupling(double c_F, ScalarFn offset) {
  if (!(c_F > 0.0)) throw ConfigError("coupling: c_F must be positive");
  CouplingF c;
  c.kind = CouplingKind::LocalLinear;
  c.c_F = c_F;
  c.L_F = c_F;
  c.offset = std::move(offset);
  return c;
}

CouplingF nonlocal_gaussian_coupling(double c_F, double amplitude, double width, ScalarFn offset,
                                     double domain_area) {
  if (!(c_F > 0.0)) throw ConfigError("coupling: c_F must be positive");
  if (!(amplitude >= 0.0) || !(width > 0.0)) {
    throw ConfigError("coupling: kernel amplitude must be >= 0 and width > 0");
  }
  CouplingF c;
  c.kind = CouplingKind::NonlocalConvolution;
  c.c_F = c_F;
  // |K * m|_{L2} <= sup|K| |Omega| |m|_{L2}
  c.L_F = c_F + amplitude * domain_area;
  c.offset = std::move(offset);
  c.kernel = [amplitude, width](const Vec2& x, const Vec2& y) {
    return amplitude * std::exp(-(x - y).squaredNorm() / (2.0 * width * width));
  };
  return c;
}

MFGProblem make_manufactured(double nu, const Hamiltonian& hamiltonian, double c_F,
                             const ExactField& u_star, const ExactField& m_star, Domain domain) {
  if (!(nu > 0.0)) throw ConfigError("make_manufactured: nu must be positive");
  if (!hamiltonian.smooth) {
    throw ConfigError("make_manufactured: Hamiltonian '" + hamiltonian.name +
                      "' is not differentiable");
  }
  MFGProblem p;
  p.name = "manufactured";
  p.nu = nu;
  p.hamiltonian = hamiltonian;
  p.domain = domain;
  const Hamiltonian h = hamiltonian;
  p.coupling = local_linear_coupling(c_F, [=](const Vec2& x) {
    return -nu * u_star.laplacian(x) + h.value(x, u_star.grad(x)) - c_F * m_star.value(x);
  });
  p.source.g_tilde = [=](const Vec2& x) -> Vec2 {
    return nu * m_star.grad(x) + m_star.value(x) * h.grad_p(x, u_star.grad(x));
  };
  p.source.nonneg_certified = false;
  p.exact = ExactSolution{u_star, m_star};
  return p;
}

MFGProblem make_sine_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                             Domain domain) {
  const ExactField s = sine_product(domain);
  MFGProblem p = make_manufactured(nu, hamiltonian, c_F, s, s, domain);
  p.name = "sine";
  return p;
}

MFGProblem make_uniform_source_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                                       double g0, double f0, Domain domain) {
  if (!(nu > 0.0)) throw ConfigError("make_uniform_source_problem: nu must be positive");
  if (!(g0 >= 0.0)) throw ConfigError("make_uniform_source_problem: g0 must be >= 0");
  MFGProblem p;
  p.name = "uniform_source";
  p.nu = nu;
  p.hamiltonian = hamiltonian;
  p.domain = domain;
  p.coupling = local_linear_coupling(c_F, [f0](const Vec2&) { return f0; });
  p.source.g0 = [g0](const Vec2&) { return g0; };
  // int g0 phi >= 0 for every phi >= 0
  p.source.nonneg_certified = true;
  return p;
}

double clipped_area_left_of(const std::array<Vec2, 3>& tri, double a) {
  // Sutherland-Hodgman against the half-plane x <= a
  std::vector<Vec2> poly;
  for (int i = 0; i < 3; ++i) {
    const Vec2& p = tri[i];
    const Vec2& q = tri[(i + 1) % 3];
    const bool p_in = p.x() <= a;
    const bool q_in = q.x() <= a;
    if (p_in) poly.push_back(p);
    if (p_in != q_in) {
      const double s = (a - p.x()) / (q.x() - p.x());
      poly.push_back(p + s * (q - p));
    }
  }
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

MFGProblem make_rough_density_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                                      double jump) {
  if (!(nu > 0.0)) throw ConfigError("make_rough_density_problem: nu must be positive");
  if (!(jump > 0.0 && jump < 1.0)) {
    throw ConfigError("make_rough_density_problem: jump must lie in (0, 1)");
  }
  MFGProblem p;
  p.name = "rough";
  p.nu = nu;
  p.hamiltonian = hamiltonian;
  p.domain = Domain::UnitSquare;
  const ExactField u_star = sine_product(Domain::UnitSquare);
  const Hamiltonian h = hamiltonian;
  p.coupling = local_linear_coupling(c_F, [=](const Vec2& x) {
    return -nu * u_star.laplacian(x) + h.value(x, u_star.grad(x));
  });
  p.source.g_tilde = [jump](const Vec2& x) -> Vec2 {
    return x.x() < jump ? Vec2(1.0, 0.0) : Vec2(0.0, 0.0);
  };
  p.source.g_tilde_integral = [jump](const std::array<Vec2, 3>& tri) -> Vec2 {
    return Vec2(clipped_area_left_of(tri, jump), 0.0);
  };
  p.source.nonneg_certified = false;
  return p;
}

MFGProblem make_zero_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                             Domain domain) {
  MFGProblem p = make_manufactured(nu, hamiltonian, c_F, zero_field(), zero_field(), domain);
  p.name = "zero";
  // G = 0 pairs to zero against every test function
  p.source.g_tilde = nullptr;
  p.source.g_tilde_integral = nullptr;
  p.source.nonneg_certified = true;
  return p;
}

Vector assemble_source_load(const P1Space& space, const SourceG& source, int degree) {
  const QuadratureRule& rule = quadrature(degree);
  Vector load = Vector::Zero(space.num_dofs());
  if (!source.g0 && !source.g_tilde && !source.g_tilde_integral) return load;
  for (int t = 0; t < space.num_elements(); ++t) {
    const auto dofs = space.elem_dofs(t);
    const auto& grads = space.elem_grads(t);
    const double area = space.elem_area(t);
    std::array<double, 3> local{0.0, 0.0, 0.0};
    const bool exact_flux = static_cast<bool>(source.g_tilde_integral);
    if (exact_flux) {
      const auto& tri = space.elem_vertices(t);
      const Vec2 flux = source.g_tilde_integral(
          {space.mesh().vertex(tri[0]), space.mesh().vertex(tri[1]), space.mesh().vertex(tri[2])});
      for (int i = 0; i < 3; ++i) local[i] += flux.dot(grads[i]);
    }
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& bary = rule.points[q];
      const Vec2 x = space.point(t, bary);
      const double w = rule.weights[q] * area;
      const double g0 = source.g0 ? source.g0(x) : 0.0;
      const Vec2 gt = (source.g_tilde && !exact_flux) ? source.g_tilde(x) : Vec2::Zero();
      for (int i = 0; i < 3; ++i) local[i] += w * (g0 * bary[i] + gt.dot(grads[i]));
    }
    for (int i = 0; i < 3; ++i) {
      if (dofs[i] != kBoundaryDof) load[dofs[i]] += local[i];
    }
  }
  return load;
}

bool certify_source(SourceG& source, const P1Space& space) {
  const Vector load = assemble_source_load(space, source);
  source.nonneg_certified = load.size() == 0 || load.minCoeff() >= -1e-10;
  return source.nonneg_certified;
}

Eigen::MatrixXd assemble_kernel_matrix(const P1Space& space, const CouplingF& coupling) {
  const int n = space.num_dofs();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  if (coupling.kind != CouplingKind::NonlocalConvolution || !coupling.kernel) return k;
  const QuadratureRule& rule = quadrature(2);
  // Q maps dofs to weighted basis values at every quadrature point
  const int nq = space.num_elements() * static_cast<int>(rule.points.size());
  std::vector<Vec2> points(nq);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nq, n);
  int row = 0;
  for (int t = 0; t < space.num_elements(); ++t) {
    const auto dofs = space.elem_dofs(t);
    for (std::size_t p = 0; p < rule.points.size(); ++p, ++row) {
      points[row] = space.point(t, rule.points[p]);
      const double w = rule.weights[p] * space.elem_area(t);
      for (int i = 0; i < 3; ++i) {
        if (dofs[i] != kBoundaryDof) q(row, dofs[i]) += w * rule.points[p][i];
      }
    }
  }
  Eigen::MatrixXd kq(nq, nq);
  for (int a = 0; a < nq; ++a) {
    for (int b = 0; b <= a; ++b) kq(a, b) = kq(b, a) = coupling.kernel(points[a], points[b]);
  }
  k = q.transpose() * kq * q;
  return k;
}

}  // namespace mfg
