#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfg/assembly.hpp"
#include "mfg/mesh.hpp"
#include "mfg/problem.hpp"
#include "mfg/solver.hpp"
#include "mfg/stabilization.hpp"

namespace mfg {

double error_l2(const P1Function& fn, const ScalarFn& exact, int degree = kDefaultQuadratureDegree);
double error_h1(const P1Function& fn, const ScalarFn& exact, const VectorFn& exact_grad,
                int degree = kDefaultQuadratureDegree);

/// Exact prolongation of `coarse` into `fine`, whose mesh must be a red-refinement
/// descendant of the coarse mesh. Throws ConfigError otherwise.
P1Function inject(const P1Function& coarse, const SpacePtr& fine);
/// Nodal values of `fine` at the vertices of `coarse` (the coarse interpolant).
P1Function restrict_to(const P1Function& fine, const SpacePtr& coarse);

struct NormPair {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// Norms of inject(coarse) - fine on the fine mesh.
NormPair error_vs_reference(const P1Function& coarse, const P1Function& fine);

/// |D grad v| in L2(Omega) for a P1 function v.
double stabilization_term(const StabilizationTensor& tensor, const P1Function& v);

struct ErrorRecord {
  int level = 0;
  double h_max = 0.0;
  int ndof = 0;
  double err_u_H1 = 0.0;
  double err_m_H1 = 0.0;
  double err_m_L2 = 0.0;
  double err_u_L2 = 0.0;
  double residual1_dual = 0.0;
  double residual2_dual = 0.0;
  double stab_term_u = 0.0;
  double stab_term_m = 0.0;
  int outer_iters = 0;
  double quasi_optimality = 0.0;
  bool tensor_zero = false;
  double min_m = 0.0;
};

enum class ErrorColumn { UH1, MH1, ML2, UL2, StabU, StabM };

/// log(e_prev / e) / log(h_prev / h); NaN when either error is not positive.
double eoc(double e_prev, double e, double h_prev, double h);

struct EOCTable {
  std::string reference;  ///< "exact" or "reference(L+offset)"
  std::vector<ErrorRecord> rows;

  /// EOC between rows i-1 and i (NaN for i = 0).
  double rate(ErrorColumn column, std::size_t i) const;
  /// Rate at the finest increment.
  double finest_rate(ErrorColumn column) const;
  /// Least-squares slope of log(value) against log(h) over rows with positive values.
  double fitted_slope(ErrorColumn column) const;

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

struct StudyConfig {
  MeshPtr base;  ///< level-0 mesh; levels are red refinements of it
  int min_level = 2;
  int max_level = 6;
  StabilizationKind stabilization = StabilizationKind::XzEdge;
  StabilizationOptions options;
  SolverConfig solver;
  int reference_offset = 2;  ///< used when the problem has no exact solution
};

/// Solves on each level and tabulates errors against the exact solution, or against a
/// solve `reference_offset` levels above max_level when there is none. Solver errors are
/// rethrown with the level in the message.
EOCTable run_convergence_study(const MFGProblem& problem, const StudyConfig& cfg);

/// min nodal m >= -1e-10. Throws ConfigError if the source is not certified nonnegative.
bool verify_dmp_at_solution(const DiscreteSolution& solution, const MFGProblem& problem);

/// (err_u_H1 + err_m_H1) / (interpolation errors of u*, m* + stabilization terms of the
/// interpolants); 0 when numerator and denominator vanish.
double quasi_optimality_ratio(const DiscreteSolution& solution, const MFGProblem& problem,
                              const StabilizationTensor& tensor);

struct MonotonicityReport {
  bool passed = true;
  int trials = 0;
  double worst_margin = 0.0;  ///< min over trials of rhs + 1e-9 - lhs
};

/// Random pairs mbar >= 0, ubar checked against
/// c_F |mbar - m|^2 <= <R1(mbar, ubar), mbar - m> - <R2(mbar, ubar), ubar - u> + 1e-9.
MonotonicityReport check_residual_monotonicity(const DiscreteSystem& sys,
                                               const DiscreteSolution& solution, int pairs,
                                               std::uint64_t seed);

}  // namespace mfg
