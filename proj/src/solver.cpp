#include "mfg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "mfg/errors.hpp"

namespace mfg {

void SolverConfig::validate() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("solver: damping must lie in (0, 1]");
  if (!(tol_outer > 0.0) || !(tol_newton > 0.0)) {
    throw ConfigError("solver: tolerances must be positive");
  }
  if (max_outer < 1 || max_newton < 1) throw ConfigError("solver: iteration limits must be >= 1");
}

namespace {

void check_residual(const SparseMatrix& a, const Vector& x, const Vector& rhs) {
  const double r = (a * x - rhs).norm();
  if (!std::isfinite(r) || r > 1e-10 * (1.0 + rhs.norm())) {
    throw SolverError("linear solve residual " + std::to_string(r) + " exceeds tolerance");
  }
}

}  // namespace

Vector solve_linear(const SparseMatrix& a, const Vector& rhs) {
  LinearSolver solver;
  return solver.solve(a, rhs);
}

Vector LinearSolver::solve(const SparseMatrix& a, const Vector& rhs) {
  if (a.rows() != a.cols() || a.rows() != rhs.size()) {
    throw SolverError("solve_linear: dimension mismatch");
  }
  if (a.rows() == 0) return Vector(0);
  if (rows_ != a.rows() || nnz_ != a.nonZeros()) {
    lu_.analyzePattern(a);
    rows_ = a.rows();
    nnz_ = a.nonZeros();
  }
  lu_.factorize(a);
  if (lu_.info() != Eigen::Success) {
    rows_ = -1;
    throw SolverError("solve_linear: factorization failed (" + lu_.lastErrorMessage() + ")");
  }
  Vector x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw SolverError("solve_linear: back substitution failed");
  check_residual(a, x, rhs);
  return x;
}

DualNorm::DualNorm(const SparseMatrix& gram) {
  llt_.compute(gram);
  if (llt_.info() != Eigen::Success) throw SolverError("dual norm: Gram matrix is not SPD");
}

Vector DualNorm::riesz(const Vector& r) const {
  if (r.size() == 0) return r;
  return llt_.solve(r);
}

double DualNorm::operator()(const Vector& r) const {
  if (r.size() == 0) return 0.0;
  return std::sqrt(std::max(r.dot(riesz(r)), 0.0));
}

double riesz_dual_norm(const SparseMatrix& gram, const Vector& r) { return DualNorm(gram)(r); }

namespace {

Vector hjb_residual(const DiscreteSystem& sys, const Vector& coupling_load, const P1Function& u) {
  return coupling_load - sys.diffusion * u.coeffs -
         assemble_hamiltonian_load(u, sys.problem->hamiltonian);
}

NewtonResult newton(const DiscreteSystem& sys, const DualNorm& dual, LinearSolver& linear,
                    const P1Function& m_fixed, const SolverConfig& cfg, const P1Function* initial) {
  const Hamiltonian& h = sys.problem->hamiltonian;
  if (!h.smooth) {
    throw ConfigError("solve_hjb: Hamiltonian '" + h.name + "' is not differentiable");
  }
  const Vector coupling_load = sys.coupling.apply(m_fixed.coeffs);
  NewtonResult result{initial ? *initial : P1Function(sys.space), 0, 0.0};
  result.residual = dual(hjb_residual(sys, coupling_load, result.u));
  std::vector<double> history{result.residual};
  while (result.residual > cfg.tol_newton) {
    if (result.iterations >= cfg.max_newton) {
      throw NonconvergenceError("HJB Newton iteration did not reach tolerance in " +
                                    std::to_string(cfg.max_newton) + " steps",
                                history);
    }
    const SparseMatrix drift = assemble_hjb_drift(*sys.space, hamiltonian_drift(result.u, h));
    const SparseMatrix op = sys.diffusion + drift;
    // L(u^n) u^{n+1} = F - H[grad u^n] + b^n . grad u^n
    const Vector rhs = coupling_load - assemble_hamiltonian_load(result.u, h) + drift * result.u.coeffs;
    const Vector full = linear.solve(op, rhs);
    const Vector step = full - result.u.coeffs;
    double t = 1.0;
    P1Function trial(sys.space, full);
    double res = dual(hjb_residual(sys, coupling_load, trial));
    for (int halvings = 0; res > result.residual && halvings < 30; ++halvings) {
      t *= 0.5;
      trial.coeffs = result.u.coeffs + t * step;
      res = dual(hjb_residual(sys, coupling_load, trial));
    }
    result.u = std::move(trial);
    result.residual = res;
    ++result.iterations;
    history.push_back(res);
  }
  return result;
}

P1Function kfp_solve(const DiscreteSystem& sys, LinearSolver& linear, const DriftField& drift) {
  const SparseMatrix op = sys.diffusion + assemble_kfp_drift(*sys.space, drift);
  return P1Function(sys.space, linear.solve(op, sys.source_load));
}

}  // namespace

NewtonResult solve_hjb(const DiscreteSystem& sys, const P1Function& m_fixed,
                       const SolverConfig& cfg, const P1Function* initial) {
  cfg.validate();
  const DualNorm dual(sys.gram);
  LinearSolver linear;
  return newton(sys, dual, linear, m_fixed, cfg, initial);
}

P1Function solve_kfp(const DiscreteSystem& sys, const P1Function& u_fixed) {
  LinearSolver linear;
  return kfp_solve(sys, linear, hamiltonian_drift(u_fixed, sys.problem->hamiltonian));
}

DiscreteSolution solve_mfg(const DiscreteSystem& sys, const SolverConfig& cfg,
                           bool throw_on_failure) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const DualNorm dual(sys.gram);
  LinearSolver linear;
  const Hamiltonian& h = sys.problem->hamiltonian;

  DiscreteSolution sol;
  sol.u = P1Function(sys.space);
  sol.m = kfp_solve(sys, linear, hamiltonian_drift(sol.u, h));
  double damping = cfg.damping;
  double previous = std::numeric_limits<double>::infinity();
  std::vector<double> history;

  auto fail = [&](const std::string& why) -> DiscreteSolution {
    if (throw_on_failure) throw NonconvergenceError(why, history);
    sol.converged = false;
    return sol;
  };

  for (int j = 1; j <= cfg.max_outer; ++j) {
    const auto start = Clock::now();
    NewtonResult hjb;
    try {
      hjb = newton(sys, dual, linear, sol.m, cfg, &sol.u);
    } catch (const NonconvergenceError& e) {
      return fail(std::string(e.what()) + " (outer iteration " + std::to_string(j) + ")");
    }
    sol.u = std::move(hjb.u);
    const P1Function target = kfp_solve(sys, linear, hamiltonian_drift(sol.u, h));
    sol.m.coeffs = (1.0 - damping) * sol.m.coeffs + damping * target.coeffs;

    OuterRecord rec;
    rec.iteration = j;
    rec.newton_iterations = hjb.iterations;
    rec.damping = damping;
    rec.residual1 = dual(assemble_hjb_nonlinear_residual(sys, sol.u, sol.m));
    rec.residual2 = dual(assemble_kfp_residual(sys, sol.u, sol.m));
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    sol.history.push_back(rec);
    sol.outer_iters = j;
    sol.newton_iters_total += hjb.iterations;
    sol.residual1_dual = rec.residual1;
    sol.residual2_dual = rec.residual2;

    const double worst = std::max(rec.residual1, rec.residual2);
    history.push_back(worst);
    if (worst <= cfg.tol_outer) {
      sol.converged = true;
      return sol;
    }
    if (j > 1 && worst > previous * (1.0 + 1e-8) && worst > 10.0 * cfg.tol_outer) {
      if (sol.damping_downgraded) {
        return fail("Picard residual increased after the damping downgrade (outer iteration " +
                    std::to_string(j) + ")");
      }
      sol.damping_downgraded = true;
      damping *= 0.5;
    }
    previous = worst;
  }
  return fail("Picard iteration did not reach tolerance in " + std::to_string(cfg.max_outer) +
              " outer iterations");
}

P1Function solve_m_k_plus(const DiscreteSystem& sys) {
  const MFGProblem& p = *sys.problem;
  if (!p.exact) throw ConfigError("solve_m_k_plus: problem '" + p.name + "' has no exact solution");
  const P1Space& space = *sys.space;
  DriftField drift(space.num_elements());
  for (int t = 0; t < space.num_elements(); ++t) {
    const Vec2 x = space.mesh().centroid(t);
    drift[t] = p.hamiltonian.grad_p(x, p.exact->u.grad(x));
  }
  LinearSolver linear;
  return kfp_solve(sys, linear, drift);
}

}  // namespace mfg
