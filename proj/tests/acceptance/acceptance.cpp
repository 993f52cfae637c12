// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/analysis.hpp"
#include "mfg/errors.hpp"

using namespace mfg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<double> g_converged_residuals;

void record_residuals(const EOCTable& table) {
  for (const auto& r : table.rows) {
    g_converged_residuals.push_back(r.residual1_dual);
    g_converged_residuals.push_back(r.residual2_dual);
  }
}

bool in_window(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

Hamiltonian axis_controls(double smoothing) {
  return finite_control({Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1)}, {0, 0, 0, 0}, smoothing);
}

StudyConfig study(MeshFamily family, StabilizationKind kind, int min_level, int max_level) {
  StudyConfig cfg;
  cfg.base = family_mesh(family, 0);
  cfg.min_level = min_level;
  cfg.max_level = max_level;
  cfg.stabilization = kind;
  return cfg;
}

Outcome rate_windows(const EOCTable& t) {
  const double uh1 = t.finest_rate(ErrorColumn::UH1);
  const double mh1 = t.finest_rate(ErrorColumn::MH1);
  const double ul2 = t.finest_rate(ErrorColumn::UL2);
  const double ml2 = t.finest_rate(ErrorColumn::ML2);
  Outcome o;
  o.pass = in_window(uh1, 0.85, 1.15) && in_window(mh1, 0.85, 1.15) && in_window(ul2, 1.7, 2.3) &&
           in_window(ml2, 1.7, 2.3);
  o.detail = "eoc_u_H1=" + fmt(uh1) + " eoc_m_H1=" + fmt(mh1) + " [0.85,1.15]; eoc_u_L2=" + fmt(ul2) +
             " eoc_m_L2=" + fmt(ml2) + " [1.7,2.3]";
  return o;
}

Outcome criterion1() {
  const MFGProblem p = make_sine_problem(1.0, huber_ball(1.0), 1.0, Domain::UnitSquare);
  const EOCTable t = run_convergence_study(p, study(MeshFamily::XzSquare, StabilizationKind::XzEdge, 2, 6));
  record_residuals(t);
  Outcome o = rate_windows(t);
  o.detail = "xz square, levels 2-6, ndof " + std::to_string(t.rows.back().ndof) + ": " + o.detail;
  return o;
}

Outcome criterion2() {
  const MFGProblem p = make_sine_problem(1.0, huber_ball(1.0), 1.0, Domain::Rhombus);
  const EOCTable t =
      run_convergence_study(p, study(MeshFamily::AcuteRhombus, StabilizationKind::AcuteArtificial, 2, 6));
  record_residuals(t);
  // the clamp engages on the coarse levels; once D vanishes it must stay zero
  bool clamp_seen = false;
  bool stays_zero = true;
  for (const auto& r : t.rows) {
    if (r.tensor_zero) clamp_seen = true;
    else if (clamp_seen) stays_zero = false;
  }
  Outcome o = rate_windows(t);
  o.pass = o.pass && clamp_seen && stays_zero;
  o.detail = "acute rhombus, levels 2-6, D=0 past clamp: " +
             std::string(clamp_seen && stays_zero ? "yes" : "no") + "; " + o.detail;
  return o;
}

Outcome criterion3() {
  bool pass = true;
  std::string detail;
  const struct {
    MeshFamily family;
    StabilizationKind kind;
    Domain domain;
    const char* name;
  } families[] = {{MeshFamily::XzSquare, StabilizationKind::XzEdge, Domain::UnitSquare, "square"},
                  {MeshFamily::AcuteRhombus, StabilizationKind::AcuteArtificial, Domain::Rhombus, "rhombus"}};
  for (const auto& f : families) {
    const MFGProblem p = make_uniform_source_problem(1.0, huber_ball(1.0), 1.0, 1.0, 1.0, f.domain);
    const EOCTable t = run_convergence_study(p, study(f.family, f.kind, 2, 6));
    record_residuals(t);
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& r : t.rows) lowest = std::min(lowest, r.min_m);
    const auto space = std::make_shared<const P1Space>(family_mesh(f.family, 4));
    const auto tensor = build_stabilization(*space, f.kind, 1.0, 1.0);
    const DmpReport dmp = verify_h2_dmp(*space, 1.0, tensor, 1.0, 200, 2024);
    pass = pass && lowest >= -1e-10 && dmp.passed && dmp.trials == 200;
    detail += std::string(detail.empty() ? "" : "; ") + f.name + ": min m_k=" + fmt(lowest) +
              ", dmp trials " + std::to_string(dmp.trials) + " min=" + fmt(dmp.min_value) +
              (dmp.passed ? " ok" : " FAILED");
  }
  return {pass, detail};
}

Outcome criterion4() {
  MFGProblem p = make_rough_density_problem(1.0, huber_ball(1.0), 1.0);
  StudyConfig cfg = study(MeshFamily::XzSquare, StabilizationKind::XzEdge, 2, 6);
  cfg.reference_offset = 2;
  const EOCTable t = run_convergence_study(p, cfg);
  record_residuals(t);
  const double uh1 = t.finest_rate(ErrorColumn::UH1);
  const double mh1 = t.finest_rate(ErrorColumn::MH1);
  const double ml2 = t.finest_rate(ErrorColumn::ML2);
  const bool pass = in_window(uh1, 0.8, 1.2) && in_window(ml2, 0.8, 1.2) && std::isfinite(mh1) &&
                    mh1 <= uh1 - 0.2;
  return {pass, t.reference + ": eoc_u_H1=" + fmt(uh1) + " eoc_m_L2=" + fmt(ml2) +
                    " [0.8,1.2]; eoc_m_H1=" + fmt(mh1) + " (gap " + fmt(uh1 - mh1) + " >= 0.2)"};
}

Outcome criterion5() {
  const MFGProblem p = make_uniform_source_problem(1.0, huber_ball(1.0), 1.0, 1.0, 1.0, Domain::UnitSquare);
  const auto space = std::make_shared<const P1Space>(family_mesh(MeshFamily::XzSquare, 4));
  const auto tensor = build_stabilization(*space, StabilizationKind::XzEdge, 1.0, 1.0);
  const DiscreteSystem sys(space, p, tensor);
  const DiscreteSolution sol = solve_mfg(sys, SolverConfig{});
  g_converged_residuals.push_back(sol.residual1_dual);
  g_converged_residuals.push_back(sol.residual2_dual);
  const MonotonicityReport r = check_residual_monotonicity(sys, sol, 50, 2024);
  return {r.passed && r.trials == 50,
          std::to_string(r.trials) + " pairs at level 4, worst margin " + fmt(r.worst_margin)};
}

Outcome criterion6() {
  const MFGProblem p = make_sine_problem(1.0, huber_ball(1.0), 1.0, Domain::UnitSquare);
  std::vector<double> errors;
  std::vector<double> sizes;
  for (int level = 3; level <= 6; ++level) {
    const MeshPtr mesh = family_mesh(MeshFamily::XzSquare, level);
    const auto space = std::make_shared<const P1Space>(mesh);
    const auto tensor = build_stabilization(*space, StabilizationKind::XzEdge, 1.0, 1.0);
    const DiscreteSystem sys(space, p, tensor);
    errors.push_back(error_l2(solve_m_k_plus(sys), p.exact->m.value));
    sizes.push_back(mesh_size(*mesh));
  }
  bool pass = true;
  std::string rates;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double r = eoc(errors[i - 1], errors[i], sizes[i - 1], sizes[i]);
    pass = pass && std::isfinite(r) && r >= 0.85;
    rates += (i > 1 ? " " : "") + fmt(r);
  }
  return {pass, "eoc of |m* - m_k+| over levels 3-6: " + rates + " (>= 0.85)"};
}

Outcome criterion7() {
  double worst = 0.0;
  for (double r : g_converged_residuals) worst = std::max(worst, r);
  return {!g_converged_residuals.empty() && worst <= 1e-9,
          std::to_string(g_converged_residuals.size() / 2) + " converged solves, max dual residual " +
              fmt(worst) + " (<= 1e-9)"};
}

Outcome criterion8() {
  bool pass = true;
  std::string detail;
  for (const Hamiltonian& h : {huber_ball(1.0), axis_controls(0.1)}) {
    const double grad = check_gradient(h, 1000, 11);
    const double conv = convexity_violation(h, 10000, 12);
    const double bound = max_grad_norm(h, 10000, 13);
    const auto coarse = std::make_shared<const P1Space>(family_mesh(MeshFamily::XzSquare, 3));
    const auto fine = std::make_shared<const P1Space>(family_mesh(MeshFamily::XzSquare, 4));
    const double rc = check_semismooth_bound(h, coarse, 20, 14);
    const double rf = check_semismooth_bound(h, fine, 20, 14);
    const double factor = std::max(rc, rf) / std::min(rc, rf);
    const bool ok = grad < 1e-5 && conv <= 1e-12 && bound <= h.L_H + 1e-12 && std::isfinite(factor) &&
                    factor <= 2.0;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + h.name + ": fd=" + fmt(grad) +
              " convexity=" + fmt(conv) + " |dH/dp|=" + fmt(bound) + " ratio factor=" + fmt(factor);
  }
  return {pass, detail};
}

Outcome criterion9() {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
  const P1Space ref(std::make_shared<const Mesh2D>(v, std::vector<Triangle>{{0, 1, 2}}));
  Eigen::Matrix3d k_hand;
  k_hand << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  Eigen::Matrix3d m_hand;
  m_hand << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  m_hand /= 24.0;
  const double ek = (element_diffusion(ref, 0, Mat2::Identity()) - k_hand).cwiseAbs().maxCoeff();
  const double em = (element_mass(ref, 0) - m_hand).cwiseAbs().maxCoeff();

  double row_sum = 0.0;
  double transpose = 0.0;
  std::srand(5);
  for (MeshFamily family : {MeshFamily::XzSquare, MeshFamily::AcuteRhombus}) {
    const P1Space space(family_mesh(family, 4));
    const SparseMatrix full = assemble_diffusion_full(space, 1.0, zero_tensor(space.mesh()));
    row_sum = std::max(row_sum, (full * Vector::Ones(full.cols())).cwiseAbs().maxCoeff());
    DriftField b(space.num_elements());
    for (auto& d : b) d = Vec2::Random();
    const SparseMatrix diff = SparseMatrix(assemble_hjb_drift(space, b).transpose()) - assemble_kfp_drift(space, b);
    double worst = 0.0;
    for (int c = 0; c < diff.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(diff, c); it; ++it) worst = std::max(worst, std::abs(it.value()));
    }
    transpose = std::max(transpose, worst);
  }
  const bool pass = ek <= 1e-14 && em <= 1e-14 && row_sum <= 1e-13 && transpose <= 1e-14;
  return {pass, "stiffness " + fmt(ek) + ", mass " + fmt(em) + " (1e-14); row sums " + fmt(row_sum) +
                    " (1e-13); C - B^T " + fmt(transpose) + " (1e-14)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"smooth rates on the xz square", criterion1},
      {"quasi-optimality on acute meshes", criterion2},
      {"discrete maximum principle", criterion3},
      {"rough density on the convex square", criterion4},
      {"residual monotonicity inequality", criterion5},
      {"auxiliary density floor", criterion6},
      {"solver exactness at the fixed point", criterion7},
      {"hamiltonian calculus", criterion8},
      {"assembly oracles", criterion9}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %zu: %s | %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
