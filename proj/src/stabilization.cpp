#include "mfg/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>

#include "mfg/assembly.hpp"
#include "mfg/errors.hpp"
#include "mfg/solver.hpp"

namespace mfg {

std::string to_string(StabilizationKind kind) {
  switch (kind) {
    case StabilizationKind::None:
      return "none";
    case StabilizationKind::XzEdge:
      return "xz";
    case StabilizationKind::AcuteArtificial:
      return "acute";
  }
  return "unknown";
}

bool StabilizationTensor::is_zero() const {
  return std::all_of(per_element.begin(), per_element.end(),
                     [](const Mat2& d) { return (d.array() == 0.0).all(); });
}

namespace {

double observed_cd(const std::vector<Mat2>& per_element, const Mesh2D& mesh) {
  double cd = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    cd = std::max(cd, per_element[t].norm() / mesh.diameter(t));
  }
  return cd;
}

}  // namespace

StabilizationTensor zero_tensor(const Mesh2D& mesh) {
  StabilizationTensor tensor;
  tensor.kind = StabilizationKind::None;
  tensor.per_element.assign(mesh.num_triangles(), Mat2::Zero());
  tensor.mesh = &mesh;
  return tensor;
}

double xz_weight_lower_bound(const Mesh2D& mesh) {
  // delta / (2 (d + 1)) with d = 2
  return shape_regularity(mesh) / 6.0;
}

double default_omega_factor(const Mesh2D& mesh) { return 2.0 * xz_weight_lower_bound(mesh); }

StabilizationTensor build_xz_tensor(const Mesh2D& mesh, double L_H, double omega_factor) {
  if (!(L_H >= 0.0)) throw ConfigError("build_xz_tensor: L_H must be >= 0");
  const double lower = xz_weight_lower_bound(mesh);
  if (!(omega_factor > lower)) {
    throw ConfigError("build_xz_tensor: omega_factor " + std::to_string(omega_factor) +
                      " violates the edge-weight lower bound omega > delta L_H diam(E) / "
                      "(2(d+1)), i.e. omega_factor > delta/6 = " +
                      std::to_string(lower));
  }
  StabilizationTensor tensor;
  tensor.kind = StabilizationKind::XzEdge;
  tensor.mesh = &mesh;
  tensor.per_element.assign(mesh.num_triangles(), Mat2::Zero());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int e : mesh.triangle_edges(t)) {
      if (!mesh.is_internal_edge(e)) continue;
      const double weight = omega_factor * L_H * mesh.edge_length(e);
      const Vec2 tangent = mesh.edge_tangent(e);
      tensor.per_element[t] += weight * tangent * tangent.transpose();
    }
  }
  tensor.c_d_observed = observed_cd(tensor.per_element, mesh);
  return tensor;
}

double sigma_min(const P1Space& space) {
  double sigma = std::numeric_limits<double>::infinity();
  for (int t = 0; t < space.num_elements(); ++t) {
    const auto& g = space.elem_grads(t);
    const double smallest = std::min({g[0].norm(), g[1].norm(), g[2].norm()});
    sigma = std::min(sigma, space.mesh().diameter(t) * smallest);
  }
  return sigma;
}

StabilizationTensor build_acute_tensor(const P1Space& space, double L_H, double nu, double mu) {
  if (!(mu > 1.0)) throw ConfigError("build_acute_tensor: mu must be > 1");
  if (!(nu > 0.0)) throw ConfigError("build_acute_tensor: nu must be > 0");
  if (!(L_H >= 0.0)) throw ConfigError("build_acute_tensor: L_H must be >= 0");
  const Mesh2D& mesh = space.mesh();
  const double theta = check_acute(mesh);
  if (!(theta > 0.0)) {
    throw ConfigError("build_acute_tensor: mesh is not strictly acute (theta = 0)");
  }
  const double scale = mu * L_H / (sigma_min(space) * std::sin(theta));
  StabilizationTensor tensor;
  tensor.kind = StabilizationKind::AcuteArtificial;
  tensor.mesh = &mesh;
  tensor.per_element.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double coefficient = std::max(scale * mesh.diameter(t) - nu, 0.0);
    tensor.per_element[t] = coefficient * Mat2::Identity();
  }
  tensor.c_d_observed = observed_cd(tensor.per_element, mesh);
  return tensor;
}

StabilizationTensor build_stabilization(const P1Space& space, StabilizationKind kind, double L_H,
                                        double nu, const StabilizationOptions& options) {
  switch (kind) {
    case StabilizationKind::None:
      return zero_tensor(space.mesh());
    case StabilizationKind::XzEdge: {
      const double omega = options.omega_factor > 0.0 ? options.omega_factor
                                                      : default_omega_factor(space.mesh());
      return build_xz_tensor(space.mesh(), L_H, omega);
    }
    case StabilizationKind::AcuteArtificial:
      return build_acute_tensor(space, L_H, nu, options.mu);
  }
  throw ConfigError("unknown stabilization kind");
}

double verify_h1(const StabilizationTensor& tensor, const Mesh2D& mesh) {
  if (static_cast<int>(tensor.per_element.size()) != mesh.num_triangles()) {
    throw ConfigError("verify_h1: tensor and mesh sizes differ");
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat2& d = tensor.per_element[t];
    if (std::abs(d(0, 1) - d(1, 0)) > 1e-12 * std::max(1.0, d.norm())) {
      throw InvariantError("stabilization tensor is not symmetric on element " + std::to_string(t));
    }
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(d);
    if (eig.eigenvalues().minCoeff() < -1e-12) {
      throw InvariantError("stabilization tensor is not positive semi-definite on element " +
                           std::to_string(t) + " (eigenvalue " +
                           std::to_string(eig.eigenvalues().minCoeff()) + ")");
    }
  }
  return observed_cd(tensor.per_element, mesh);
}

DmpReport verify_h2_dmp(const P1Space& space, double nu, const StabilizationTensor& tensor,
                        double L_H, int trials, std::uint64_t seed,
                        const std::optional<std::vector<Vec2>>& drift) {
  constexpr double tol = -1e-10;
  const SparseMatrix diffusion = assemble_diffusion(space, nu, tensor);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DmpReport report;
  report.min_value = std::numeric_limits<double>::infinity();
  const int n = space.num_dofs();
  for (int k = 0; k < trials; ++k) {
    std::vector<Vec2> b(space.num_elements());
    if (drift) {
      b = *drift;
    } else {
      for (auto& v : b) {
        const double r = L_H * std::sqrt(unit(rng));
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        v = Vec2(r * std::cos(phi), r * std::sin(phi));
      }
    }
    // half the trials use sparse loads, where positivity is least trivial
    Vector load(n);
    const bool sparse = (k % 2) == 1;
    for (int i = 0; i < n; ++i) {
      const double keep = unit(rng);
      const double value = unit(rng);
      load[i] = (sparse && keep < 0.9) ? 0.0 : value;
    }
    const SparseMatrix op = diffusion + assemble_hjb_drift(space, b);
    const SparseMatrix adjoint = SparseMatrix(op.transpose());
    for (const SparseMatrix* m : {&op, &adjoint}) {
      const Vector v = solve_linear(*m, load);
      const double lowest = n > 0 ? v.minCoeff() : 0.0;
      report.min_value = std::min(report.min_value, lowest);
      if (lowest < tol) report.passed = false;
    }
    ++report.trials;
  }
  if (report.trials == 0) report.min_value = 0.0;
  return report;
}

void write_tensor_csv(const StabilizationTensor& tensor, std::ostream& out) {
  const auto old_precision = out.precision();
  out << "element,d11,d12,d22\n" << std::setprecision(17);
  for (std::size_t t = 0; t < tensor.per_element.size(); ++t) {
    const Mat2& d = tensor.per_element[t];
    out << t << ',' << d(0, 0) << ',' << d(0, 1) << ',' << d(1, 1) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace mfg
