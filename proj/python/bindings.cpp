#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mfg/analysis.hpp"
#include "mfg/config.hpp"
#include "mfg/errors.hpp"

namespace py = pybind11;
using namespace mfg;

namespace {

Config make_config(const std::map<std::string, std::string>& overrides) {
  Config c;
  for (const auto& [key, value] : overrides) c.set_from_string(key + "=" + value);
  return c;
}

MeshPtr level_mesh(const RunConfig& rc, int level) {
  return refinement_hierarchy(base_mesh(rc), level).back();
}

Eigen::MatrixXd vertex_array(const Mesh2D& mesh) {
  Eigen::MatrixXd v(mesh.num_vertices(), 2);
  for (int i = 0; i < mesh.num_vertices(); ++i) v.row(i) = mesh.vertex(i).transpose();
  return v;
}

Eigen::MatrixXi triangle_array(const Mesh2D& mesh) {
  Eigen::MatrixXi t(mesh.num_triangles(), 3);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    for (int j = 0; j < 3; ++j) t(k, j) = mesh.triangle(k)[j];
  }
  return t;
}

Eigen::VectorXd nodal(const P1Function& fn) {
  const Mesh2D& mesh = fn.space->mesh();
  Eigen::VectorXd v(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) v[i] = fn.vertex_value(i);
  return v;
}

MeshPtr family_of(const std::string& name, int level) {
  if (name == "xz_square") return family_mesh(MeshFamily::XzSquare, level);
  if (name == "acute_rhombus") return family_mesh(MeshFamily::AcuteRhombus, level);
  throw ConfigError("unknown mesh family '" + name + "'");
}

py::dict quality(const Mesh2D& mesh) {
  const MeshQualityReport q = mesh_quality(mesh);
  py::dict d;
  d["h_max"] = q.h_max;
  d["shape_regularity"] = q.shape_regularity;
  d["xz_satisfied"] = q.xz_satisfied;
  d["xz_worst_edge_sum"] = q.xz_worst_edge_sum;
  d["acute_theta"] = q.acute_theta;
  return d;
}

py::dict solve(const std::map<std::string, std::string>& overrides, bool allow_unstabilized) {
  const Config config = make_config(overrides);
  const RunConfig rc = parse_run_config(config);
  const StabilizationKind kind = resolve_stabilization(rc, allow_unstabilized);
  const MFGProblem problem = build_problem(rc);
  const auto space = std::make_shared<const P1Space>(level_mesh(rc, rc.level));
  const StabilizationTensor tensor =
      build_stabilization(*space, kind, problem.hamiltonian.L_H, problem.nu, rc.stab_options);
  const DiscreteSystem sys(space, problem, tensor);
  DiscreteSolution sol;
  {
    py::gil_scoped_release release;
    sol = solve_mfg(sys, rc.solver, false);
  }
  py::dict d;
  d["config_hash"] = config.hash();
  d["vertices"] = vertex_array(space->mesh());
  d["triangles"] = triangle_array(space->mesh());
  d["u"] = nodal(sol.u);
  d["m"] = nodal(sol.m);
  d["converged"] = sol.converged;
  d["outer_iterations"] = sol.outer_iters;
  d["newton_iterations"] = sol.newton_iters_total;
  d["residual1_dual"] = sol.residual1_dual;
  d["residual2_dual"] = sol.residual2_dual;
  d["stabilization"] = to_string(kind);
  return d;
}

std::string convergence(const std::map<std::string, std::string>& overrides, bool allow_unstabilized) {
  const RunConfig rc = parse_run_config(make_config(overrides));
  const StabilizationKind kind = resolve_stabilization(rc, allow_unstabilized);
  MFGProblem problem = build_problem(rc);
  StudyConfig study;
  study.base = base_mesh(rc);
  study.min_level = rc.min_level;
  study.max_level = rc.max_level;
  study.stabilization = kind;
  study.options = rc.stab_options;
  study.solver = rc.solver;
  study.reference_offset = rc.reference_offset;
  EOCTable table;
  {
    py::gil_scoped_release release;
    table = run_convergence_study(problem, study);
  }
  return table.to_json().dump();
}

Hamiltonian hamiltonian_of(const std::map<std::string, std::string>& overrides) {
  return build_hamiltonian(parse_run_config(make_config(overrides)));
}

}  // namespace

PYBIND11_MODULE(_mfgfem, m) {
  m.doc() = "P1 finite elements for stationary mean field games";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("mesh", [](const std::string& family, int level) {
        const MeshPtr mesh = family_of(family, level);
        return py::make_tuple(vertex_array(*mesh), triangle_array(*mesh));
      },
      py::arg("family"), py::arg("level"), "Vertices and triangles of a family mesh");
  m.def("mesh_quality", [](const std::string& family, int level) { return quality(*family_of(family, level)); },
        py::arg("family"), py::arg("level"));
  m.def("mesh_quality_of",
        [](const Eigen::MatrixXd& vertices, const Eigen::MatrixXi& triangles) {
          std::vector<Vec2> v;
          for (Eigen::Index i = 0; i < vertices.rows(); ++i) v.emplace_back(vertices(i, 0), vertices(i, 1));
          std::vector<Triangle> t;
          for (Eigen::Index k = 0; k < triangles.rows(); ++k) {
            t.push_back({triangles(k, 0), triangles(k, 1), triangles(k, 2)});
          }
          return quality(Mesh2D(std::move(v), std::move(t)));
        },
        py::arg("vertices"), py::arg("triangles"));
  m.def("read_mesh", [](const std::string& path) {
        const MeshPtr mesh = read_mesh(path);
        return py::make_tuple(vertex_array(*mesh), triangle_array(*mesh));
      },
      py::arg("path"));

  m.def("config_hash", [](const std::map<std::string, std::string>& overrides) {
        return make_config(overrides).hash();
      },
      py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("solve", &solve, py::arg("overrides") = std::map<std::string, std::string>{},
        py::arg("allow_unstabilized") = false,
        "Solve the discrete system; overrides use the config keys, values as config literals");
  m.def("convergence_json", &convergence, py::arg("overrides") = std::map<std::string, std::string>{},
        py::arg("allow_unstabilized") = false);

  m.def("hamiltonian_value",
        [](const std::map<std::string, std::string>& overrides, double px, double py_) {
          return hamiltonian_of(overrides).value(Vec2::Zero(), Vec2(px, py_));
        },
        py::arg("overrides"), py::arg("px"), py::arg("py"));
  m.def("check_gradient", [](const std::map<std::string, std::string>& overrides, int samples, std::uint64_t seed) {
        return check_gradient(hamiltonian_of(overrides), samples, seed);
      },
      py::arg("overrides"), py::arg("samples") = 1000, py::arg("seed") = 0);
  m.def("convexity_violation",
        [](const std::map<std::string, std::string>& overrides, int triples, std::uint64_t seed) {
          return convexity_violation(hamiltonian_of(overrides), triples, seed);
        },
        py::arg("overrides"), py::arg("triples") = 10000, py::arg("seed") = 0);
  m.def("max_grad_norm", [](const std::map<std::string, std::string>& overrides, int samples, std::uint64_t seed) {
        const Hamiltonian h = hamiltonian_of(overrides);
        return py::make_tuple(max_grad_norm(h, samples, seed), h.L_H);
      },
      py::arg("overrides"), py::arg("samples") = 10000, py::arg("seed") = 0);

  m.def("verify_dmp",
        [](const std::string& family, int level, double nu, int trials, std::uint64_t seed) {
          const P1Space space(family_of(family, level));
          const StabilizationKind kind =
              family == "acute_rhombus" ? StabilizationKind::AcuteArtificial : StabilizationKind::XzEdge;
          const StabilizationTensor tensor = build_stabilization(space, kind, 1.0, nu);
          const DmpReport r = verify_h2_dmp(space, nu, tensor, 1.0, trials, seed);
          py::dict d;
          d["passed"] = r.passed;
          d["trials"] = r.trials;
          d["min_value"] = r.min_value;
          return d;
        },
        py::arg("family"), py::arg("level"), py::arg("nu") = 1.0, py::arg("trials") = 20, py::arg("seed") = 0);

  m.def("reference_matrices", []() {
    const P1Space ref(std::make_shared<const Mesh2D>(std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}},
                                                     std::vector<Triangle>{{0, 1, 2}}));
    return py::make_tuple(Eigen::Matrix3d(element_diffusion(ref, 0, Mat2::Identity())),
                          Eigen::Matrix3d(element_mass(ref, 0)));
  });
}
