#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mfg/fespace.hpp"
#include "mfg/hamiltonian.hpp"
#include "mfg/problem.hpp"
#include "mfg/stabilization.hpp"

namespace mfg {

using SparseMatrix = Eigen::SparseMatrix<double>;
/// One constant vector per element.
using DriftField = std::vector<Vec2>;

/// Local 3x3 matrix area * (A grad xi_j).grad xi_i.
Eigen::Matrix3d element_diffusion(const P1Space& space, int t, const Mat2& a);
/// Local consistent mass matrix area/12 * [[2,1,1],[1,2,1],[1,1,2]].
Eigen::Matrix3d element_mass(const P1Space& space, int t);

/// K_A on the interior dofs with A = nu I + D. Throws ConfigError if the tensor was
/// built on another mesh.
SparseMatrix assemble_diffusion(const P1Space& space, double nu, const StabilizationTensor& tensor);
/// Same bilinear form over all vertices, before boundary elimination.
SparseMatrix assemble_diffusion_full(const P1Space& space, double nu,
                                     const StabilizationTensor& tensor);
/// Unstabilized stiffness with nu = 1.
SparseMatrix assemble_stiffness(const P1Space& space);

/// B_ij = sum_K (b_K . grad xi_j) area(K)/3 (row i: test function).
SparseMatrix assemble_hjb_drift(const P1Space& space, const DriftField& drift);
/// C_ij = sum_K (b_K . grad xi_i) area(K)/3 (column j: density basis); equals B^T.
SparseMatrix assemble_kfp_drift(const P1Space& space, const DriftField& drift);

SparseMatrix assemble_mass(const P1Space& space);
/// Mass + unstabilized stiffness; realizes the H1 inner product on V_k.
SparseMatrix assemble_h1_gram(const P1Space& space);

/// b_i = sum_K c_K area(K)/3 over elements touching dof i.
Vector assemble_piecewise_constant_load(const P1Space& space, const std::vector<double>& values);
/// b_i = int f xi_i with the given quadrature degree.
Vector assemble_function_load(const P1Space& space, const ScalarFn& f,
                              int degree = kDefaultQuadratureDegree);

/// dH/dp(x_K, grad u|_K) with x_K the element centroid.
DriftField hamiltonian_drift(const P1Function& u, const Hamiltonian& h);
/// int H(x, grad u) xi_i: exact (area/3) when H does not depend on x, degree-2 otherwise.
Vector assemble_hamiltonian_load(const P1Function& u, const Hamiltonian& h);

/// Discrete realization of m -> <F[m], psi>: c_F M m + K m + offset load.
class CouplingOperator {
 public:
  CouplingOperator(const P1Space& space, const CouplingF& coupling, const SparseMatrix& mass);

  Vector apply(const Vector& m) const { return linear(m) + offset_load_; }
  Vector linear(const Vector& m) const;
  const Vector& offset_load() const { return offset_load_; }

 private:
  double c_F_;
  SparseMatrix mass_;
  Eigen::MatrixXd kernel_;  ///< empty for local couplings
  Vector offset_load_;
};

/// Operators and loads of one (problem, space, tensor) triple.
struct DiscreteSystem {
  DiscreteSystem(SpacePtr space, const MFGProblem& problem, const StabilizationTensor& tensor);

  SpacePtr space;
  const MFGProblem* problem;
  SparseMatrix mass;
  SparseMatrix gram;
  SparseMatrix diffusion;  ///< K_A
  Vector source_load;      ///< <G, phi_i>
  CouplingOperator coupling;
};

/// <R1(m, u), psi_i> = <F[m], psi_i> - int A grad u.grad psi_i + H[grad u] psi_i.
Vector assemble_hjb_nonlinear_residual(const DiscreteSystem& sys, const P1Function& u,
                                       const P1Function& m);
/// <R2(m, u), phi_i> = <G, phi_i> - int A grad m.grad phi_i + m dH/dp[grad u].grad phi_i.
Vector assemble_kfp_residual(const DiscreteSystem& sys, const P1Function& u, const P1Function& m);

/// Diffusion + kfp drift with b_K = dH/dp(grad u|_K).
SparseMatrix assemble_kfp_operator(const P1Space& space, const P1Function& u, const Hamiltonian& h,
                                   double nu, const StabilizationTensor& tensor);

/// Matrix Market coordinate, general real, 17 significant digits.
void write_matrix_market(const SparseMatrix& a, std::ostream& out);

}  // namespace mfg
