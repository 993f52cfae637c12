#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mfg/assembly.hpp"

namespace mfg {

struct SolverConfig {
  double tol_outer = 1e-9;
  int max_outer = 200;
  double damping = 0.5;
  double tol_newton = 1e-11;
  int max_newton = 50;

  /// Throws ConfigError unless 0 < damping <= 1, tolerances > 0 and limits >= 1.
  void validate() const;
};

struct OuterRecord {
  int iteration = 0;
  double residual1 = 0.0;
  double residual2 = 0.0;
  int newton_iterations = 0;
  double damping = 0.0;
  double seconds = 0.0;
};

struct DiscreteSolution {
  P1Function u;
  P1Function m;
  int outer_iters = 0;
  int newton_iters_total = 0;
  double residual1_dual = 0.0;
  double residual2_dual = 0.0;
  bool damping_downgraded = false;
  bool converged = false;
  std::vector<OuterRecord> history;
};

/// Direct sparse LU solve. Throws SolverError on a singular factorization or if
/// |A x - b| > 1e-10 (1 + |b|).
Vector solve_linear(const SparseMatrix& a, const Vector& rhs);

/// Reuses the symbolic analysis across matrices with one sparsity pattern.
class LinearSolver {
 public:
  Vector solve(const SparseMatrix& a, const Vector& rhs);

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  Eigen::Index rows_ = -1;
  Eigen::Index nnz_ = -1;
};

/// sqrt(r^T Gram^{-1} r) with a cached Cholesky factorization of the Gram matrix.
class DualNorm {
 public:
  explicit DualNorm(const SparseMatrix& gram);
  double operator()(const Vector& r) const;
  /// Riesz representer w with Gram w = r.
  Vector riesz(const Vector& r) const;

 private:
  Eigen::SimplicialLLT<SparseMatrix> llt_;
};

double riesz_dual_norm(const SparseMatrix& gram, const Vector& r);

struct NewtonResult {
  P1Function u;
  int iterations = 0;
  double residual = 0.0;
};

/// Semismooth Newton for the HJB equation with the density frozen at m_fixed.
/// Throws NonconvergenceError after cfg.max_newton steps.
NewtonResult solve_hjb(const DiscreteSystem& sys, const P1Function& m_fixed, const SolverConfig& cfg,
                       const P1Function* initial = nullptr);

/// Linear KFP solve with the drift dH/dp[grad u_fixed].
P1Function solve_kfp(const DiscreteSystem& sys, const P1Function& u_fixed);

/// Damped Picard iteration on the coupled system; residuals in the dual norm.
/// Throws NonconvergenceError (with the residual history) when max_outer is exhausted,
/// unless `throw_on_failure` is false, in which case the last iterate is returned with
/// converged = false.
DiscreteSolution solve_mfg(const DiscreteSystem& sys, const SolverConfig& cfg,
                           bool throw_on_failure = true);

/// KFP solve with drift dH/dp(grad u*(centroid)) from the exact value function.
/// Throws ConfigError if the problem has no exact solution.
P1Function solve_m_k_plus(const DiscreteSystem& sys);

}  // namespace mfg
