#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfg/fespace.hpp"
#include "mfg/mesh.hpp"

namespace mfg {

enum class StabilizationKind { None, XzEdge, AcuteArtificial };

std::string to_string(StabilizationKind kind);

/// Element-wise constant symmetric PSD tensor D added to nu*I in every diffusion term.
struct StabilizationTensor {
  StabilizationKind kind = StabilizationKind::None;
  std::vector<Mat2> per_element;
  /// max over K of |D|_K|_F / diam(K)
  double c_d_observed = 0.0;
  /// Mesh the tensor was built on; assembly refuses tensors from a different mesh.
  const Mesh2D* mesh = nullptr;

  bool is_zero() const;
};

/// D = 0 on every element.
StabilizationTensor zero_tensor(const Mesh2D& mesh);

/// Smallest admissible omega_factor is delta/6 (strict); the default doubles it.
double xz_weight_lower_bound(const Mesh2D& mesh);
double default_omega_factor(const Mesh2D& mesh);

/// Edge-tensor stabilization for meshes satisfying the cotangent (XZ) condition:
/// D|_K = sum over internal edges E of K of w_E t_E t_E^T with
/// w_E = omega_factor * L_H * |E|.
StabilizationTensor build_xz_tensor(const Mesh2D& mesh, double L_H, double omega_factor);

/// min over K of diam(K) * min_i |grad psi_i^K|.
double sigma_min(const P1Space& space);

/// Isotropic artificial diffusion for strictly acute meshes:
/// D|_K = max(mu L_H diam(K) / (sigma sin(theta)) - nu, 0) I.
StabilizationTensor build_acute_tensor(const P1Space& space, double L_H, double nu, double mu);

struct StabilizationOptions {
  double omega_factor = 0.0;  ///< XZ edge weights; <= 0 selects default_omega_factor
  double mu = 1.1;            ///< acute safety factor
};

/// Dispatches on `kind`; `None` gives the zero tensor.
StabilizationTensor build_stabilization(const P1Space& space, StabilizationKind kind, double L_H,
                                        double nu, const StabilizationOptions& options = {});

/// Checks PSD per element (eigenvalues >= -1e-12) and returns c_d_observed.
/// Throws InvariantError naming the first offending element.
double verify_h1(const StabilizationTensor& tensor, const Mesh2D& mesh);

struct DmpReport {
  bool passed = true;
  int trials = 0;
  double min_value = 0.0;  ///< smallest nodal value over all primal and adjoint solves
};

/// Samples the operator class {nu*I + D, drift b with |b| <= L_H}: every trial draws an
/// element-wise constant drift uniformly from the disk of radius L_H (unless `drift`
/// is given) and a nonnegative load, solves L v = b and L^T v = b, and checks
/// v >= -1e-10 nodally.
DmpReport verify_h2_dmp(const P1Space& space, double nu, const StabilizationTensor& tensor,
                        double L_H, int trials, std::uint64_t seed,
                        const std::optional<std::vector<Vec2>>& drift = std::nullopt);

/// One row per element: `element,d11,d12,d22`.
void write_tensor_csv(const StabilizationTensor& tensor, std::ostream& out);

}  // namespace mfg
