#include "mfg/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

#include "mfg/errors.hpp"

namespace mfg {

double error_l2(const P1Function& fn, const ScalarFn& exact, int degree) {
  const P1Space& space = *fn.space;
  const QuadratureRule& rule = quadrature(degree);
  double sum = 0.0;
  for (int t = 0; t < space.num_elements(); ++t) {
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double e = exact(space.point(t, rule.points[q])) - fn.eval(t, rule.points[q]);
      local += rule.weights[q] * e * e;
    }
    sum += local * space.elem_area(t);
  }
  return std::sqrt(sum);
}

double error_h1(const P1Function& fn, const ScalarFn& exact, const VectorFn& exact_grad,
                int degree) {
  const P1Space& space = *fn.space;
  const QuadratureRule& rule = quadrature(degree);
  double sum = 0.0;
  for (int t = 0; t < space.num_elements(); ++t) {
    const Vec2 g = fn.grad(t);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = space.point(t, rule.points[q]);
      const double e = exact(x) - fn.eval(t, rule.points[q]);
      local += rule.weights[q] * (e * e + (exact_grad(x) - g).squaredNorm());
    }
    sum += local * space.elem_area(t);
  }
  return std::sqrt(sum);
}

namespace {

// Meshes from `fine` up to (excluding) `coarse`, finest first.
std::vector<const Mesh2D*> lineage_chain(const Mesh2D& coarse, const Mesh2D& fine) {
  std::vector<const Mesh2D*> chain;
  const Mesh2D* m = &fine;
  while (m != &coarse) {
    if (!m->parent()) throw ConfigError("meshes are not nested (no refinement path)");
    chain.push_back(m);
    m = m->parent().get();
  }
  return chain;
}

std::vector<double> vertex_values(const P1Function& fn) {
  const Mesh2D& mesh = fn.space->mesh();
  std::vector<double> values(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) values[v] = fn.vertex_value(v);
  return values;
}

P1Function from_vertex_values(const SpacePtr& space, const std::vector<double>& values) {
  Vector c(space->num_dofs());
  for (int i = 0; i < space->num_dofs(); ++i) c[i] = values[space->vertex_of_dof(i)];
  return P1Function(space, std::move(c));
}

}  // namespace

P1Function inject(const P1Function& coarse, const SpacePtr& fine) {
  const auto chain = lineage_chain(coarse.space->mesh(), fine->mesh());
  std::vector<double> values = vertex_values(coarse);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto& lineage = (*it)->vertex_lineage();
    std::vector<double> next(lineage.size());
    for (std::size_t v = 0; v < lineage.size(); ++v) {
      next[v] = 0.5 * (values[lineage[v][0]] + values[lineage[v][1]]);
    }
    values = std::move(next);
  }
  return from_vertex_values(fine, values);
}

P1Function restrict_to(const P1Function& fine, const SpacePtr& coarse) {
  lineage_chain(coarse->mesh(), fine.space->mesh());
  // red refinement keeps parent vertex numbering
  const std::vector<double> values = vertex_values(fine);
  return from_vertex_values(coarse, values);
}

NormPair error_vs_reference(const P1Function& coarse, const P1Function& fine) {
  const P1Function injected = inject(coarse, fine.space);
  const Vector d = injected.coeffs - fine.coeffs;
  const SparseMatrix mass = assemble_mass(*fine.space);
  const SparseMatrix gram = assemble_h1_gram(*fine.space);
  return {std::sqrt(std::max(d.dot(mass * d), 0.0)), std::sqrt(std::max(d.dot(gram * d), 0.0))};
}

double stabilization_term(const StabilizationTensor& tensor, const P1Function& v) {
  const P1Space& space = *v.space;
  if (tensor.per_element.empty()) return 0.0;
  double sum = 0.0;
  for (int t = 0; t < space.num_elements(); ++t) {
    sum += space.elem_area(t) * (tensor.per_element[t] * v.grad(t)).squaredNorm();
  }
  return std::sqrt(sum);
}

double eoc(double e_prev, double e, double h_prev, double h) {
  if (!(e_prev > 0.0) || !(e > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(e_prev / e) / std::log(h_prev / h);
}

namespace {

double column_value(const ErrorRecord& r, ErrorColumn c) {
  switch (c) {
    case ErrorColumn::UH1:
      return r.err_u_H1;
    case ErrorColumn::MH1:
      return r.err_m_H1;
    case ErrorColumn::ML2:
      return r.err_m_L2;
    case ErrorColumn::UL2:
      return r.err_u_L2;
    case ErrorColumn::StabU:
      return r.stab_term_u;
    case ErrorColumn::StabM:
      return r.stab_term_m;
  }
  return 0.0;
}

}  // namespace

double EOCTable::rate(ErrorColumn column, std::size_t i) const {
  if (i == 0 || i >= rows.size()) return std::numeric_limits<double>::quiet_NaN();
  return eoc(column_value(rows[i - 1], column), column_value(rows[i], column), rows[i - 1].h_max,
             rows[i].h_max);
}

double EOCTable::finest_rate(ErrorColumn column) const {
  return rows.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : rate(column, rows.size() - 1);
}

double EOCTable::fitted_slope(ErrorColumn column) const {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    const double v = column_value(r, column);
    if (!(v > 0.0)) continue;
    const double x = std::log(r.h_max);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void EOCTable::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision();
  out << "level,h,ndof,err_u_H1,eoc_u_H1,err_m_H1,eoc_m_H1,err_m_L2,eoc_m_L2,err_u_L2,eoc_u_L2,"
         "stab_u,stab_m,res1,res2,outer_iters\n"
      << std::setprecision(17);
  auto rate_field = [&](ErrorColumn c, std::size_t i) {
    const double r = rate(c, i);
    if (std::isfinite(r)) out << r;
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ErrorRecord& r = rows[i];
    out << r.level << ',' << r.h_max << ',' << r.ndof << ',' << r.err_u_H1 << ',';
    rate_field(ErrorColumn::UH1, i);
    out << ',' << r.err_m_H1 << ',';
    rate_field(ErrorColumn::MH1, i);
    out << ',' << r.err_m_L2 << ',';
    rate_field(ErrorColumn::ML2, i);
    out << ',' << r.err_u_L2 << ',';
    rate_field(ErrorColumn::UL2, i);
    out << ',' << r.stab_term_u << ',' << r.stab_term_m << ',' << r.residual1_dual << ','
        << r.residual2_dual << ',' << r.outer_iters << '\n';
  }
  out.precision(old_precision);
}

nlohmann::json EOCTable::to_json() const {
  auto rate_json = [&](ErrorColumn c, std::size_t i) -> nlohmann::json {
    const double r = rate(c, i);
    return std::isfinite(r) ? nlohmann::json(r) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["reference"] = reference;
  j["rows"] = nlohmann::json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ErrorRecord& r = rows[i];
    j["rows"].push_back({{"level", r.level},
                         {"h", r.h_max},
                         {"ndof", r.ndof},
                         {"err_u_H1", r.err_u_H1},
                         {"eoc_u_H1", rate_json(ErrorColumn::UH1, i)},
                         {"err_m_H1", r.err_m_H1},
                         {"eoc_m_H1", rate_json(ErrorColumn::MH1, i)},
                         {"err_m_L2", r.err_m_L2},
                         {"eoc_m_L2", rate_json(ErrorColumn::ML2, i)},
                         {"err_u_L2", r.err_u_L2},
                         {"eoc_u_L2", rate_json(ErrorColumn::UL2, i)},
                         {"stab_u", r.stab_term_u},
                         {"stab_m", r.stab_term_m},
                         {"res1", r.residual1_dual},
                         {"res2", r.residual2_dual},
                         {"outer_iters", r.outer_iters},
                         {"quasi_optimality", r.quasi_optimality},
                         {"tensor_zero", r.tensor_zero},
                         {"min_m", r.min_m}});
  }
  return j;
}

namespace {

struct LevelSolve {
  SpacePtr space;
  StabilizationTensor tensor;
  DiscreteSolution solution;
};

LevelSolve solve_level(const MFGProblem& problem, const MeshPtr& mesh, const StudyConfig& cfg,
                       int level) {
  LevelSolve out;
  out.space = std::make_shared<const P1Space>(mesh);
  try {
    out.tensor = build_stabilization(*out.space, cfg.stabilization, problem.hamiltonian.L_H,
                                     problem.nu, cfg.options);
    const DiscreteSystem sys(out.space, problem, out.tensor);
    out.solution = solve_mfg(sys, cfg.solver);
  } catch (const NonconvergenceError& e) {
    throw NonconvergenceError("level " + std::to_string(level) + ": " + e.what(), e.history());
  } catch (const SolverError& e) {
    throw SolverError("level " + std::to_string(level) + ": " + e.what());
  }
  return out;
}

}  // namespace

EOCTable run_convergence_study(const MFGProblem& problem, const StudyConfig& cfg) {
  if (!cfg.base) throw ConfigError("convergence study: no base mesh");
  if (cfg.min_level < 0 || cfg.max_level - cfg.min_level < 2) {
    throw ConfigError("convergence study: needs at least three levels for EOC columns");
  }
  if (cfg.reference_offset < 1 && !problem.exact) {
    throw ConfigError("convergence study: reference offset must be >= 1");
  }
  const int top = problem.exact ? cfg.max_level : cfg.max_level + cfg.reference_offset;
  const auto meshes = refinement_hierarchy(cfg.base, top);

  EOCTable table;
  std::optional<LevelSolve> reference;
  if (problem.exact) {
    table.reference = "exact";
  } else {
    table.reference = "reference(level " + std::to_string(top) + ")";
    reference = solve_level(problem, meshes[top], cfg, top);
  }

  for (int level = cfg.min_level; level <= cfg.max_level; ++level) {
    LevelSolve run = solve_level(problem, meshes[level], cfg, level);
    const DiscreteSolution& sol = run.solution;
    ErrorRecord rec;
    rec.level = level;
    rec.h_max = mesh_size(*meshes[level]);
    rec.ndof = run.space->num_dofs();
    rec.residual1_dual = sol.residual1_dual;
    rec.residual2_dual = sol.residual2_dual;
    rec.outer_iters = sol.outer_iters;
    rec.tensor_zero = run.tensor.is_zero();
    rec.min_m = sol.m.coeffs.size() > 0 ? sol.m.coeffs.minCoeff() : 0.0;
    if (problem.exact) {
      const ExactSolution& ex = *problem.exact;
      rec.err_u_H1 = error_h1(sol.u, ex.u.value, ex.u.grad);
      rec.err_m_H1 = error_h1(sol.m, ex.m.value, ex.m.grad);
      rec.err_u_L2 = error_l2(sol.u, ex.u.value);
      rec.err_m_L2 = error_l2(sol.m, ex.m.value);
      rec.stab_term_u = stabilization_term(run.tensor, interpolate(run.space, ex.u.value));
      rec.stab_term_m = stabilization_term(run.tensor, interpolate(run.space, ex.m.value));
      rec.quasi_optimality = quasi_optimality_ratio(sol, problem, run.tensor);
    } else {
      const DiscreteSolution& ref = reference->solution;
      const NormPair eu = error_vs_reference(sol.u, ref.u);
      const NormPair em = error_vs_reference(sol.m, ref.m);
      rec.err_u_H1 = eu.h1;
      rec.err_u_L2 = eu.l2;
      rec.err_m_H1 = em.h1;
      rec.err_m_L2 = em.l2;
      rec.stab_term_u = stabilization_term(run.tensor, restrict_to(ref.u, run.space));
      rec.stab_term_m = stabilization_term(run.tensor, restrict_to(ref.m, run.space));
    }
    table.rows.push_back(rec);
  }
  return table;
}

bool verify_dmp_at_solution(const DiscreteSolution& solution, const MFGProblem& problem) {
  if (!problem.source.nonneg_certified) {
    throw ConfigError("verify_dmp_at_solution: source of problem '" + problem.name +
                      "' is not certified nonnegative");
  }
  return solution.m.coeffs.size() == 0 || solution.m.coeffs.minCoeff() >= -1e-10;
}

double quasi_optimality_ratio(const DiscreteSolution& solution, const MFGProblem& problem,
                              const StabilizationTensor& tensor) {
  if (!problem.exact) {
    throw ConfigError("quasi_optimality_ratio: problem '" + problem.name +
                      "' has no exact solution");
  }
  const ExactSolution& ex = *problem.exact;
  const SpacePtr& space = solution.u.space;
  const P1Function iu = interpolate(space, ex.u.value);
  const P1Function im = interpolate(space, ex.m.value);
  const double numerator = error_h1(solution.u, ex.u.value, ex.u.grad) +
                           error_h1(solution.m, ex.m.value, ex.m.grad);
  const double denominator = error_h1(iu, ex.u.value, ex.u.grad) +
                             error_h1(im, ex.m.value, ex.m.grad) + stabilization_term(tensor, iu) +
                             stabilization_term(tensor, im);
  if (denominator == 0.0) return numerator == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return numerator / denominator;
}

MonotonicityReport check_residual_monotonicity(const DiscreteSystem& sys,
                                               const DiscreteSolution& solution, int pairs,
                                               std::uint64_t seed) {
  if (!sys.problem->source.nonneg_certified) {
    throw ConfigError("residual monotonicity check needs a nonnegative source");
  }
  constexpr double slack = 1e-9;
  const int n = sys.space->num_dofs();
  const double c_F = sys.problem->coupling.c_F;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MonotonicityReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < pairs; ++k) {
    P1Function mbar(sys.space);
    P1Function ubar(sys.space);
    for (int i = 0; i < n; ++i) mbar.coeffs[i] = std::abs(normal(rng));
    for (int i = 0; i < n; ++i) ubar.coeffs[i] = normal(rng);
    const Vector dm = mbar.coeffs - solution.m.coeffs;
    const Vector du = ubar.coeffs - solution.u.coeffs;
    const double lhs = c_F * dm.dot(sys.mass * dm);
    const double rhs = assemble_hjb_nonlinear_residual(sys, ubar, mbar).dot(dm) -
                       assemble_kfp_residual(sys, ubar, mbar).dot(du);
    const double margin = rhs + slack - lhs;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < 0.0) report.passed = false;
    ++report.trials;
  }
  if (report.trials == 0) report.worst_margin = 0.0;
  return report;
}

}  // namespace mfg
