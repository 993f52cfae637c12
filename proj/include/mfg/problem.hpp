#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mfg/fespace.hpp"
#include "mfg/hamiltonian.hpp"

namespace mfg {

enum class Domain { UnitSquare, Rhombus, Other };

std::string to_string(Domain domain);

/// Smooth scalar field with the derivatives the manufactured construction needs.
struct ExactField {
  ScalarFn value;
  VectorFn grad;
  ScalarFn laplacian;
};

/// sin(pi s) sin(pi t) in the domain's parallelogram coordinates (s, t); vanishes on
/// the boundary of the unit square and of the rhombus.
ExactField sine_product(Domain domain);
ExactField zero_field();

enum class CouplingKind { LocalLinear, NonlocalConvolution };

/// F[m] = c_F m + (kernel * m) + offset. The kernel is absent for LocalLinear.
struct CouplingF {
  CouplingKind kind = CouplingKind::LocalLinear;
  double c_F = 1.0;
  double L_F = 1.0;
  ScalarFn offset;  ///< empty means zero
  std::function<double(const Vec2&, const Vec2&)> kernel;
};

CouplingF local_linear_coupling(double c_F, ScalarFn offset);

/// Gaussian kernel amplitude * exp(-|x-y|^2 / (2 width^2)), symmetric positive semi-definite.
CouplingF nonlocal_gaussian_coupling(double c_F, double amplitude, double width, ScalarFn offset,
                                     double domain_area);

/// G = g0 - div(g_tilde), paired with test functions as int g0 phi + g_tilde . grad phi.
struct SourceG {
  ScalarFn g0;       ///< empty means zero
  VectorFn g_tilde;  ///< empty means zero
  /// Exact integral of g_tilde over a triangle; when set it replaces quadrature, which
  /// keeps loads exact for piecewise constant fields that jump inside elements.
  std::function<Vec2(const std::array<Vec2, 3>&)> g_tilde_integral;
  bool nonneg_certified = false;
};

struct ExactSolution {
  ExactField u;
  ExactField m;
};

struct MFGProblem {
  std::string name;
  double nu = 1.0;
  Hamiltonian hamiltonian;
  CouplingF coupling;
  SourceG source;
  Domain domain = Domain::UnitSquare;
  std::optional<ExactSolution> exact;
};

/// Builds data for which (u_star, m_star) solves the weak system exactly:
/// offset = -nu lap u* + H(grad u*) - c_F m*, and G paired as
/// int nu grad m*.grad phi + m* dH/dp(grad u*).grad phi. The source is not certified
/// nonnegative; see certify_source.
MFGProblem make_manufactured(double nu, const Hamiltonian& hamiltonian, double c_F,
                             const ExactField& u_star, const ExactField& m_star,
                             Domain domain = Domain::UnitSquare);

/// Manufactured sine instance u* = m* = sin sin on the given domain.
MFGProblem make_sine_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                             Domain domain);

/// G = g0 (constant, >= 0), coupling F[m] = c_F m + f0. No exact solution.
MFGProblem make_uniform_source_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                                       double g0, double f0, Domain domain);

/// Unit square, g0 = 0, g_tilde = (1, 0) on {x < jump} and 0 elsewhere, so G is a line
/// source on x = jump and m has a kink there. F[m] = c_F m + f0 with
/// f0 = -nu lap u* + H(grad u*) for the sine u*. No exact solution.
/// The default jump 1/3 is not a dyadic rational, so no refinement level resolves it.
MFGProblem make_rough_density_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                                      double jump = 1.0 / 3.0);

/// Area of {x < a} inside the triangle.
double clipped_area_left_of(const std::array<Vec2, 3>& tri, double a);

/// All data zero apart from offset H(x, 0), so (0, 0) is the solution.
MFGProblem make_zero_problem(double nu, const Hamiltonian& hamiltonian, double c_F,
                             Domain domain = Domain::UnitSquare);

/// b_i = int g0 xi_i + g_tilde . grad xi_i, element by element with the given rule.
Vector assemble_source_load(const P1Space& space, const SourceG& source,
                            int degree = kDefaultQuadratureDegree);

/// Sets nonneg_certified iff every nodal load on `space` is >= -1e-10. Returns the flag.
bool certify_source(SourceG& source, const P1Space& space);

/// Dense matrix K_ij = int int kernel(x, y) xi_j(y) xi_i(x) (degree-2 quadrature in both
/// variables). Zero matrix for local couplings.
Eigen::MatrixXd assemble_kernel_matrix(const P1Space& space, const CouplingF& coupling);

}  // namespace mfg
