#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfg/analysis.hpp"
#include "mfg/config.hpp"
#include "mfg/errors.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mfg;

namespace {

enum ExitCode { kOk = 0, kVerifyFailed = 1, kInputError = 2, kNonconvergence = 3 };

struct Context {
  Config config;
  RunConfig rc;
  std::string hash;
  bool allow_unstabilized = false;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

fs::path output_dir(const RunConfig& rc) {
  fs::path dir(rc.output_dir);
  fs::create_directories(dir);
  return dir;
}

json header(const Context& ctx, const std::string& command) {
  json doc;
  doc["config_hash"] = ctx.hash;
  doc["command"] = command;
  doc["config"] = json::parse(ctx.config.to_json().dump());
  return doc;
}

MeshPtr level_mesh(const RunConfig& rc, int level) {
  return refinement_hierarchy(base_mesh(rc), level).back();
}

json quality_json(const MeshQualityReport& q) {
  return {{"h_max", q.h_max},
          {"shape_regularity", q.shape_regularity},
          {"xz_satisfied", q.xz_satisfied},
          {"xz_worst_edge_sum", number(q.xz_worst_edge_sum)},
          {"acute_theta", q.acute_theta}};
}

int cmd_check_mesh(const Context& ctx) {
  const StabilizationKind kind = resolve_stabilization(ctx.rc, ctx.allow_unstabilized);
  const MeshPtr mesh = level_mesh(ctx.rc, ctx.rc.level);
  const MeshQualityReport q = mesh_quality(*mesh);
  bool ok = true;
  if (kind == StabilizationKind::XzEdge) ok = q.xz_satisfied;
  if (kind == StabilizationKind::AcuteArtificial) ok = q.acute_theta > 0.0;
  json doc = header(ctx, "check-mesh");
  doc["level"] = ctx.rc.level;
  doc["vertices"] = mesh->num_vertices();
  doc["triangles"] = mesh->num_triangles();
  doc["stabilization"] = to_string(kind);
  doc["quality"] = quality_json(q);
  doc["condition_satisfied"] = ok;
  std::cout << doc.dump(2) << '\n';
  return ok ? kOk : kVerifyFailed;
}

json telemetry(const Context& ctx, const DiscreteSolution& sol, int level, int ndof,
               StabilizationKind kind) {
  json doc = header(ctx, "solve");
  doc["level"] = level;
  doc["ndof"] = ndof;
  doc["stabilization"] = to_string(kind);
  doc["converged"] = sol.converged;
  doc["outer_iters"] = sol.outer_iters;
  doc["newton_iters_total"] = sol.newton_iters_total;
  doc["residual1_dual"] = sol.residual1_dual;
  doc["residual2_dual"] = sol.residual2_dual;
  doc["damping_downgraded"] = sol.damping_downgraded;
  json history = json::array();
  for (const auto& r : sol.history) {
    json row{{"iteration", r.iteration},
             {"residual1_dual", r.residual1},
             {"residual2_dual", r.residual2},
             {"newton_iterations", r.newton_iterations},
             {"damping", r.damping}};
    if (ctx.rc.timings) row["seconds"] = r.seconds;
    history.push_back(row);
  }
  doc["history"] = history;
  return doc;
}

void write_solution_csv(const Context& ctx, const P1Function& fn, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << "# config_hash=" << ctx.hash << '\n';
  write_function_csv(fn, out);
}

int cmd_solve(const Context& ctx) {
  const RunConfig& rc = ctx.rc;
  const StabilizationKind kind = resolve_stabilization(rc, ctx.allow_unstabilized);
  const MFGProblem problem = build_problem(rc);
  const auto space = std::make_shared<const P1Space>(level_mesh(rc, rc.level));
  const StabilizationTensor tensor =
      build_stabilization(*space, kind, problem.hamiltonian.L_H, problem.nu, rc.stab_options);
  const DiscreteSystem sys(space, problem, tensor);
  const DiscreteSolution sol = solve_mfg(sys, rc.solver, false);
  const fs::path dir = output_dir(rc);
  write_solution_csv(ctx, sol.u, dir / "solution_u.csv");
  write_solution_csv(ctx, sol.m, dir / "solution_m.csv");
  write_json(dir / "telemetry.json", telemetry(ctx, sol, rc.level, space->num_dofs(), kind));
  if (!sol.converged) {
    std::cerr << "mfgfem: solver did not converge (last residuals " << sol.residual1_dual << ", "
              << sol.residual2_dual << ")\n";
    return kNonconvergence;
  }
  return kOk;
}

json verdict(bool pass, json detail) {
  detail["pass"] = pass;
  return detail;
}

bool in_window(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

int cmd_convergence(const Context& ctx) {
  const RunConfig& rc = ctx.rc;
  if (rc.max_level - rc.min_level < 2) {
    throw ConfigError("convergence: mesh.levels must span at least three levels");
  }
  const StabilizationKind kind = resolve_stabilization(rc, ctx.allow_unstabilized);
  MFGProblem problem = build_problem(rc);
  StudyConfig study;
  study.base = base_mesh(rc);
  study.min_level = rc.min_level;
  study.max_level = rc.max_level;
  study.stabilization = kind;
  study.options = rc.stab_options;
  study.solver = rc.solver;
  study.reference_offset = rc.reference_offset;
  if (!problem.exact && !problem.source.nonneg_certified) {
    const auto top = refinement_hierarchy(study.base, rc.max_level + rc.reference_offset).back();
    certify_source(problem.source, P1Space(top));
  }
  const EOCTable table = run_convergence_study(problem, study);

  const fs::path dir = output_dir(rc);
  {
    std::ofstream out(dir / "eoc.csv");
    out << "# config_hash=" << ctx.hash << '\n';
    table.write_csv(out);
  }

  json verdicts;
  if (problem.exact) {
    const double eu = table.finest_rate(ErrorColumn::UH1);
    const double em = table.finest_rate(ErrorColumn::MH1);
    const double lu = table.finest_rate(ErrorColumn::UL2);
    const double lm = table.finest_rate(ErrorColumn::ML2);
    verdicts["h1_rates"] = verdict(in_window(eu, 0.85, 1.15) && in_window(em, 0.85, 1.15),
                                   {{"eoc_u_H1", number(eu)}, {"eoc_m_H1", number(em)},
                                    {"window", {0.85, 1.15}}});
    verdicts["l2_rates"] = verdict(in_window(lu, 1.7, 2.3) && in_window(lm, 1.7, 2.3),
                                   {{"eoc_u_L2", number(lu)}, {"eoc_m_L2", number(lm)},
                                    {"window", {1.7, 2.3}}});
    double worst_q = 0.0;
    for (const auto& r : table.rows) worst_q = std::max(worst_q, r.quasi_optimality);
    verdicts["quasi_optimality"] = verdict(worst_q <= 50.0, {{"max_ratio", worst_q}, {"bound", 50.0}});
    if (kind == StabilizationKind::AcuteArtificial) {
      bool clamp_seen = false;
      bool zero_after = true;
      for (const auto& r : table.rows) {
        if (r.tensor_zero) clamp_seen = true;
        else if (clamp_seen) zero_after = false;
      }
      verdicts["tensor_vanishes"] = verdict(clamp_seen && zero_after, {{"clamp_engaged", clamp_seen}});
    }
  } else {
    const double eu = table.finest_rate(ErrorColumn::UH1);
    const double em = table.finest_rate(ErrorColumn::MH1);
    const double lm = table.finest_rate(ErrorColumn::ML2);
    verdicts["reference_u_h1"] = verdict(in_window(eu, 0.8, 1.2), {{"eoc_u_H1", number(eu)}});
    verdicts["reference_m_l2"] = verdict(in_window(lm, 0.8, 1.2), {{"eoc_m_L2", number(lm)}});
    verdicts["reference_m_h1_separation"] =
        verdict(std::isfinite(eu) && std::isfinite(em) && em <= eu - 0.2,
                {{"eoc_m_H1", number(em)}, {"eoc_u_H1", number(eu)}, {"min_gap", 0.2}});
  }
  if (problem.source.nonneg_certified) {
    double lowest = 0.0;
    for (const auto& r : table.rows) lowest = std::min(lowest, r.min_m);
    verdicts["dmp"] = verdict(lowest >= -1e-10, {{"min_m", lowest}});
  }
  bool all = true;
  for (const auto& [name, v] : verdicts.items()) all = all && v["pass"].get<bool>();

  json doc = header(ctx, "convergence");
  doc["stabilization"] = to_string(kind);
  doc["best_approximation_proxy"] = "nodal interpolation error";
  doc["table"] = json::parse(table.to_json().dump());
  doc["verdicts"] = verdicts;
  doc["pass"] = all;
  write_json(dir / "report.json", doc);
  return all ? kOk : kVerifyFailed;
}

int cmd_verify(const Context& ctx) {
  const RunConfig& rc = ctx.rc;
  const StabilizationKind kind = resolve_stabilization(rc, ctx.allow_unstabilized);
  const Hamiltonian h = build_hamiltonian(rc);
  const int level = rc.verify.level;
  const MeshPtr mesh = level_mesh(rc, level);
  const auto space = std::make_shared<const P1Space>(mesh);
  // configuration errors (e.g. omega below its bound) surface here, before any suite
  const StabilizationTensor tensor = build_stabilization(*space, kind, h.L_H, rc.nu, rc.stab_options);

  json suites;
  {
    bool ok = true;
    std::string message;
    double cd = 0.0;
    try {
      cd = verify_h1(tensor, *mesh);
    } catch (const InvariantError& e) {
      ok = false;
      message = e.what();
    }
    suites["h1_tensor"] = verdict(ok, {{"c_d_observed", cd}, {"message", message}});
  }
  {
    const DmpReport r = verify_h2_dmp(*space, rc.nu, tensor, h.L_H, rc.verify.dmp_trials, rc.seed);
    suites["h2_dmp"] = verdict(r.passed, {{"trials", r.trials}, {"min_value", r.min_value}});
  }
  {
    MFGProblem p = make_uniform_source_problem(rc.nu, h, rc.c_F, 1.0, rc.f0, mesh_domain(rc));
    const DiscreteSystem sys(space, p, tensor);
    const DiscreteSolution sol = solve_mfg(sys, rc.solver);
    const MonotonicityReport r =
        check_residual_monotonicity(sys, sol, rc.verify.monotonicity_pairs, rc.seed);
    suites["residual_monotonicity"] =
        verdict(r.passed, {{"pairs", r.trials}, {"worst_margin", r.worst_margin}});
  }
  {
    const double err = h.smooth ? check_gradient(h, rc.verify.gradient_samples, rc.seed) : NAN;
    suites["gradient"] = verdict(h.smooth && err < 1e-5, {{"max_relative_error", number(err)}});
    const double conv = convexity_violation(h, rc.verify.convexity_triples, rc.seed);
    suites["convexity"] = verdict(conv <= 1e-12, {{"max_violation", conv}});
    const double bound = max_grad_norm(h, rc.verify.bound_samples, rc.seed);
    suites["gradient_bound"] =
        verdict(bound <= h.L_H + 1e-12, {{"max_norm", bound}, {"L_H", h.L_H}});
  }
  if (h.smooth && level >= 1) {
    const auto coarse = std::make_shared<const P1Space>(level_mesh(rc, level - 1));
    const double rc_coarse = check_semismooth_bound(h, coarse, rc.verify.semismooth_pairs, rc.seed);
    const double rc_fine = check_semismooth_bound(h, space, rc.verify.semismooth_pairs, rc.seed);
    const double factor = std::max(rc_coarse, rc_fine) / std::min(rc_coarse, rc_fine);
    suites["semismooth_bound"] = verdict(
        std::isfinite(factor) && factor <= 2.0,
        {{"ratio_coarse", rc_coarse}, {"ratio_fine", rc_fine}, {"factor", number(factor)}});
  }
  bool all = true;
  for (const auto& [name, v] : suites.items()) all = all && v["pass"].get<bool>();
  json doc = header(ctx, "verify");
  doc["level"] = level;
  doc["stabilization"] = to_string(kind);
  doc["suites"] = suites;
  doc["pass"] = all;
  write_json(output_dir(rc) / "report.json", doc);
  std::cout << (all ? "verify: pass" : "verify: FAIL") << '\n';
  return all ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilized P1 finite elements for stationary mean field games"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  bool allow_unstabilized = false;
  app.add_option("-c,--config", config_path, "Configuration file (key = value)");
  app.add_option("-s,--set", overrides, "Override a configuration entry, e.g. mesh.level=5");
  app.add_flag("--allow-unstabilized", allow_unstabilized,
               "Permit stabilization = none (voids the maximum principle)");
  app.fallthrough();
  auto* check = app.add_subcommand("check-mesh", "Report mesh quality and condition checks");
  auto* solve = app.add_subcommand("solve", "Solve the discrete system on one level");
  auto* conv = app.add_subcommand("convergence", "Run a convergence study and write EOC tables");
  auto* verify = app.add_subcommand("verify", "Run the property suites");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  Context ctx;
  try {
    if (!config_path.empty()) ctx.config = Config::load(config_path);
    for (const auto& o : overrides) ctx.config.set_from_string(o);
    ctx.rc = parse_run_config(ctx.config);
    ctx.hash = ctx.config.hash();
    ctx.allow_unstabilized = allow_unstabilized;
    if (check->parsed()) return cmd_check_mesh(ctx);
    if (solve->parsed()) return cmd_solve(ctx);
    if (conv->parsed()) return cmd_convergence(ctx);
    if (verify->parsed()) return cmd_verify(ctx);
  } catch (const NonconvergenceError& e) {
    std::cerr << "mfgfem: " << e.what() << '\n';
    return kNonconvergence;
  } catch (const ParseError& e) {
    std::cerr << "mfgfem: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError& e) {
    std::cerr << "mfgfem: configuration error: " << e.what() << '\n';
    return kInputError;
  } catch (const GeometryError& e) {
    std::cerr << "mfgfem: mesh error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "mfgfem: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kInputError;
}
