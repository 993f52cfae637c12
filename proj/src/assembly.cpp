#include "mfg/assembly.hpp"

#include <iomanip>
#include <ostream>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(const std::array<int, 3>& dofs, const Eigen::Matrix3d& local, Triplets& out) {
  for (int i = 0; i < 3; ++i) {
    if (dofs[i] == kBoundaryDof) continue;
    for (int j = 0; j < 3; ++j) {
      if (dofs[j] == kBoundaryDof) continue;
      out.emplace_back(dofs[i], dofs[j], local(i, j));
    }
  }
}

SparseMatrix build(int n, const Triplets& triplets) {
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

template <typename LocalFn>
SparseMatrix assemble_interior(const P1Space& space, LocalFn local) {
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(space.num_elements()) * 9);
  for (int t = 0; t < space.num_elements(); ++t) scatter(space.elem_dofs(t), local(t), triplets);
  return build(space.num_dofs(), triplets);
}

void check_tensor(const P1Space& space, const StabilizationTensor& tensor) {
  if (tensor.kind == StabilizationKind::None && tensor.per_element.empty()) return;
  if (tensor.mesh != &space.mesh() ||
      static_cast<int>(tensor.per_element.size()) != space.num_elements()) {
    throw ConfigError("stabilization tensor was built on a different mesh");
  }
}

Mat2 diffusion_tensor(double nu, const StabilizationTensor& tensor, int t) {
  Mat2 a = nu * Mat2::Identity();
  if (!tensor.per_element.empty()) a += tensor.per_element[t];
  return a;
}

void check_drift(const P1Space& space, const DriftField& drift) {
  if (static_cast<int>(drift.size()) != space.num_elements()) {
    throw ConfigError("drift field has " + std::to_string(drift.size()) + " entries, mesh has " +
                      std::to_string(space.num_elements()) + " elements");
  }
}

Eigen::Matrix3d element_drift(const P1Space& space, int t, const Vec2& b) {
  const auto& g = space.elem_grads(t);
  const double w = space.elem_area(t) / 3.0;
  Eigen::Matrix3d local;
  for (int j = 0; j < 3; ++j) {
    const double c = w * b.dot(g[j]);
    for (int i = 0; i < 3; ++i) local(i, j) = c;
  }
  return local;
}

}  // namespace

Eigen::Matrix3d element_diffusion(const P1Space& space, int t, const Mat2& a) {
  const auto& g = space.elem_grads(t);
  const double area = space.elem_area(t);
  Eigen::Matrix3d local;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) local(i, j) = area * (a * g[j]).dot(g[i]);
  }
  return local;
}

Eigen::Matrix3d element_mass(const P1Space& space, int t) {
  Eigen::Matrix3d local = Eigen::Matrix3d::Constant(1.0);
  local.diagonal().setConstant(2.0);
  return local * (space.elem_area(t) / 12.0);
}

SparseMatrix assemble_diffusion(const P1Space& space, double nu,
                                const StabilizationTensor& tensor) {
  check_tensor(space, tensor);
  return assemble_interior(space, [&](int t) {
    return element_diffusion(space, t, diffusion_tensor(nu, tensor, t));
  });
}

SparseMatrix assemble_diffusion_full(const P1Space& space, double nu,
                                     const StabilizationTensor& tensor) {
  check_tensor(space, tensor);
  Triplets triplets;
  for (int t = 0; t < space.num_elements(); ++t) {
    const Eigen::Matrix3d local = element_diffusion(space, t, diffusion_tensor(nu, tensor, t));
    const auto& tri = space.elem_vertices(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(tri[i], tri[j], local(i, j));
    }
  }
  return build(space.mesh().num_vertices(), triplets);
}

SparseMatrix assemble_stiffness(const P1Space& space) {
  return assemble_interior(space, [&](int t) { return element_diffusion(space, t, Mat2::Identity()); });
}

SparseMatrix assemble_hjb_drift(const P1Space& space, const DriftField& drift) {
  check_drift(space, drift);
  return assemble_interior(space, [&](int t) { return element_drift(space, t, drift[t]); });
}

SparseMatrix assemble_kfp_drift(const P1Space& space, const DriftField& drift) {
  check_drift(space, drift);
  return assemble_interior(space, [&](int t) {
    return Eigen::Matrix3d(element_drift(space, t, drift[t]).transpose());
  });
}

SparseMatrix assemble_mass(const P1Space& space) {
  return assemble_interior(space, [&](int t) { return element_mass(space, t); });
}

SparseMatrix assemble_h1_gram(const P1Space& space) {
  return assemble_interior(space, [&](int t) {
    return Eigen::Matrix3d(element_mass(space, t) + element_diffusion(space, t, Mat2::Identity()));
  });
}

Vector assemble_piecewise_constant_load(const P1Space& space, const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != space.num_elements()) {
    throw ConfigError("piecewise constant load: size does not match the mesh");
  }
  Vector load = Vector::Zero(space.num_dofs());
  for (int t = 0; t < space.num_elements(); ++t) {
    const double c = values[t] * space.elem_area(t) / 3.0;
    for (int d : space.elem_dofs(t)) {
      if (d != kBoundaryDof) load[d] += c;
    }
  }
  return load;
}

Vector assemble_function_load(const P1Space& space, const ScalarFn& f, int degree) {
  Vector load = Vector::Zero(space.num_dofs());
  if (!f) return load;
  const QuadratureRule& rule = quadrature(degree);
  for (int t = 0; t < space.num_elements(); ++t) {
    const auto dofs = space.elem_dofs(t);
    const double area = space.elem_area(t);
    std::array<double, 3> local{0.0, 0.0, 0.0};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * area * f(space.point(t, rule.points[q]));
      for (int i = 0; i < 3; ++i) local[i] += w * rule.points[q][i];
    }
    for (int i = 0; i < 3; ++i) {
      if (dofs[i] != kBoundaryDof) load[dofs[i]] += local[i];
    }
  }
  return load;
}

DriftField hamiltonian_drift(const P1Function& u, const Hamiltonian& h) {
  const P1Space& space = *u.space;
  DriftField drift(space.num_elements());
  for (int t = 0; t < space.num_elements(); ++t) {
    drift[t] = h.grad_p(space.mesh().centroid(t), u.grad(t));
  }
  return drift;
}

Vector assemble_hamiltonian_load(const P1Function& u, const Hamiltonian& h) {
  const P1Space& space = *u.space;
  if (h.x_independent) {
    std::vector<double> values(space.num_elements());
    for (int t = 0; t < space.num_elements(); ++t) {
      values[t] = h.value(space.mesh().centroid(t), u.grad(t));
    }
    return assemble_piecewise_constant_load(space, values);
  }
  Vector load = Vector::Zero(space.num_dofs());
  const QuadratureRule& rule = quadrature(2);
  for (int t = 0; t < space.num_elements(); ++t) {
    const Vec2 p = u.grad(t);
    const auto dofs = space.elem_dofs(t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w =
          rule.weights[q] * space.elem_area(t) * h.value(space.point(t, rule.points[q]), p);
      for (int i = 0; i < 3; ++i) {
        if (dofs[i] != kBoundaryDof) load[dofs[i]] += w * rule.points[q][i];
      }
    }
  }
  return load;
}

CouplingOperator::CouplingOperator(const P1Space& space, const CouplingF& coupling,
                                   const SparseMatrix& mass)
    : c_F_(coupling.c_F), mass_(mass) {
  if (coupling.kind == CouplingKind::NonlocalConvolution) {
    kernel_ = assemble_kernel_matrix(space, coupling);
  }
  offset_load_ = assemble_function_load(space, coupling.offset);
}

Vector CouplingOperator::linear(const Vector& m) const {
  Vector out = c_F_ * (mass_ * m);
  if (kernel_.size() > 0) out += kernel_ * m;
  return out;
}

DiscreteSystem::DiscreteSystem(SpacePtr s, const MFGProblem& p, const StabilizationTensor& tensor)
    : space(std::move(s)),
      problem(&p),
      mass(assemble_mass(*space)),
      gram(assemble_h1_gram(*space)),
      diffusion(assemble_diffusion(*space, p.nu, tensor)),
      source_load(assemble_source_load(*space, p.source)),
      coupling(*space, p.coupling, mass) {}

Vector assemble_hjb_nonlinear_residual(const DiscreteSystem& sys, const P1Function& u,
                                       const P1Function& m) {
  return sys.coupling.apply(m.coeffs) - sys.diffusion * u.coeffs -
         assemble_hamiltonian_load(u, sys.problem->hamiltonian);
}

Vector assemble_kfp_residual(const DiscreteSystem& sys, const P1Function& u, const P1Function& m) {
  const SparseMatrix drift =
      assemble_kfp_drift(*sys.space, hamiltonian_drift(u, sys.problem->hamiltonian));
  return sys.source_load - sys.diffusion * m.coeffs - drift * m.coeffs;
}

SparseMatrix assemble_kfp_operator(const P1Space& space, const P1Function& u, const Hamiltonian& h,
                                   double nu, const StabilizationTensor& tensor) {
  return assemble_diffusion(space, nu, tensor) + assemble_kfp_drift(space, hamiltonian_drift(u, h));
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  const auto old_precision = out.precision();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n' << std::setprecision(17);
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace mfg
