#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mfg/assembly.hpp"
#include "mfg/errors.hpp"
#include "mfg/solver.hpp"

using namespace mfg;

namespace {

SpacePtr reference_space() {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
  return std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(v, std::vector<Triangle>{{0, 1, 2}}));
}

SpacePtr space_of(MeshFamily family, int level) {
  return std::make_shared<const P1Space>(family_mesh(family, level));
}

Hamiltonian zero_hamiltonian() { return finite_control({Vec2(0, 0)}, {0.0}, 0.0); }

DriftField random_drift(const P1Space& space, unsigned seed) {
  std::srand(seed);
  DriftField b(space.num_elements());
  for (auto& v : b) v = Vec2::Random();
  return b;
}

}  // namespace

TEST(ElementMatrices, ReferenceTriangleStiffness) {
  const auto s = reference_space();
  Eigen::Matrix3d expected;
  expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  expected *= 0.5;
  EXPECT_LT((element_diffusion(*s, 0, Mat2::Identity()) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ElementMatrices, ReferenceTriangleMass) {
  const auto s = reference_space();
  Eigen::Matrix3d expected;
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected /= 24.0;
  EXPECT_LT((element_mass(*s, 0) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ElementMatrices, AnisotropicTensor) {
  const auto s = reference_space();
  Mat2 a;
  a << 2.0, 0.5, 0.5, 1.0;
  // grads: (-1,-1), (1,0), (0,1); entry (i,j) = area (A g_j).g_i
  const Vec2 g[3] = {Vec2(-1, -1), Vec2(1, 0), Vec2(0, 1)};
  const Eigen::Matrix3d k = element_diffusion(*s, 0, a);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(k(i, j), 0.5 * (a * g[j]).dot(g[i]), 1e-14);
  }
}

TEST(GlobalMatrices, FullDiffusionRowsSumToZero) {
  const auto space = space_of(MeshFamily::AcuteRhombus, 3);
  const auto tensor = build_stabilization(*space, StabilizationKind::XzEdge, 1.0, 1.0);
  const SparseMatrix k = assemble_diffusion_full(*space, 0.3, tensor);
  const Vector ones = Vector::Ones(k.cols());
  EXPECT_LT((k * ones).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((k - SparseMatrix(k.transpose())).norm(), 1e-13);
}

TEST(GlobalMatrices, StiffnessIsFivePointStencil) {
  const auto space = space_of(MeshFamily::XzSquare, 3);
  const Eigen::MatrixXd k(assemble_stiffness(*space));
  const double h = 1.0 / 8.0;
  for (int i = 0; i < space->num_dofs(); ++i) {
    for (int j = 0; j < space->num_dofs(); ++j) {
      const Vec2 d = space->mesh().vertex(space->vertex_of_dof(i)) - space->mesh().vertex(space->vertex_of_dof(j));
      const bool axis = std::abs(d.lpNorm<1>() - h) < 1e-12;
      const double expected = i == j ? 4.0 : (axis ? -1.0 : 0.0);
      EXPECT_NEAR(k(i, j), expected, 1e-13) << i << "," << j;
    }
  }
}

TEST(GlobalMatrices, MassReproducesIntegral) {
  // ||I sin sin||^2 -> 1/4 at second order
  double prev = 0.0;
  for (int level = 3; level <= 6; ++level) {
    const auto space = space_of(MeshFamily::XzSquare, level);
    const P1Function f = interpolate(space, [](const Vec2& x) {
      return std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y());
    });
    const double err = std::abs(f.coeffs.dot(assemble_mass(*space) * f.coeffs) - 0.25);
    if (level > 3) EXPECT_NEAR(std::log2(prev / err), 2.0, 0.1);
    prev = err;
  }
}

TEST(GlobalMatrices, DiffusionRejectsForeignTensor) {
  const auto space = space_of(MeshFamily::XzSquare, 2);
  const auto other = family_mesh(MeshFamily::XzSquare, 2);
  EXPECT_THROW(assemble_diffusion(*space, 1.0, zero_tensor(*other)), ConfigError);
  StabilizationTensor none;
  EXPECT_NO_THROW(assemble_diffusion(*space, 1.0, none));
}

TEST(GlobalMatrices, DiffusionIsSpdAndGramIsSpd) {
  const auto space = space_of(MeshFamily::XzSquare, 2);
  const auto tensor = build_stabilization(*space, StabilizationKind::XzEdge, 1.0, 1.0);
  for (const SparseMatrix& a : {assemble_diffusion(*space, 0.1, tensor), assemble_h1_gram(*space)}) {
    const Eigen::MatrixXd dense(a);
    EXPECT_LT((dense - dense.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Drift, MatchesElementwiseDefinition) {
  // B_ij = sum_K (b_K . grad xi_j) area(K) / 3 over elements containing both dofs
  const auto space = space_of(MeshFamily::XzSquare, 2);
  const DriftField drift = random_drift(*space, 3);
  const SparseMatrix bm = assemble_hjb_drift(*space, drift);
  const Eigen::MatrixXd dense(bm);
  for (int i = 0; i < space->num_dofs(); ++i) {
    for (int j = 0; j < space->num_dofs(); ++j) {
      double expected = 0.0;
      for (int t = 0; t < space->num_elements(); ++t) {
        const auto dofs = space->elem_dofs(t);
        for (int a = 0; a < 3; ++a) {
          if (dofs[a] != i) continue;
          for (int c = 0; c < 3; ++c) {
            if (dofs[c] == j) expected += drift[t].dot(space->elem_grads(t)[c]) * space->elem_area(t) / 3.0;
          }
        }
      }
      EXPECT_NEAR(dense(i, j), expected, 1e-15);
    }
  }
}

TEST(Drift, KfpIsTransposeOfHjb) {
  const auto space = space_of(MeshFamily::AcuteRhombus, 3);
  const DriftField b = random_drift(*space, 9);
  const SparseMatrix bm = assemble_hjb_drift(*space, b);
  const SparseMatrix cm = assemble_kfp_drift(*space, b);
  EXPECT_LT((SparseMatrix(bm.transpose()) - cm).norm(), 1e-15);
  const Vector u = Vector::Random(space->num_dofs());
  const Vector v = Vector::Random(space->num_dofs());
  EXPECT_NEAR(v.dot(bm * u), u.dot(cm * v), 1e-13);
}

TEST(Drift, ActionEqualsPiecewiseConstantLoad) {
  const auto space = space_of(MeshFamily::XzSquare, 3);
  const DriftField b = random_drift(*space, 4);
  const P1Function u(space, Vector::Random(space->num_dofs()));
  std::vector<double> values(space->num_elements());
  for (int t = 0; t < space->num_elements(); ++t) values[t] = b[t].dot(u.grad(t));
  const Vector direct = assemble_hjb_drift(*space, b) * u.coeffs;
  EXPECT_LT((direct - assemble_piecewise_constant_load(*space, values)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Drift, KfpOperatorWithZeroDriftIsDiffusion) {
  const auto space = space_of(MeshFamily::XzSquare, 3);
  const auto tensor = build_stabilization(*space, StabilizationKind::XzEdge, 1.0, 1.0);
  const P1Function u(space, Vector::Random(space->num_dofs()));
  const SparseMatrix op = assemble_kfp_operator(*space, u, zero_hamiltonian(), 0.4, tensor);
  EXPECT_LT((op - assemble_diffusion(*space, 0.4, tensor)).norm(), 1e-14);
}

TEST(Loads, FluxLoadMatchesDivergenceLoad) {
  // int g . grad xi = -int div(g) xi for xi vanishing on the boundary; exact for quadratic g
  const auto space = space_of(MeshFamily::AcuteRhombus, 3);
  SourceG g;
  g.g_tilde = [](const Vec2& x) -> Vec2 {
    return Vec2(x.x() * x.x() + 2.0 * x.y(), x.x() * x.y() - x.y() * x.y());
  };
  const Vector flux = assemble_source_load(*space, g);
  const Vector div = assemble_function_load(*space, [](const Vec2& x) { return 2.0 * x.x() + x.x() - 2.0 * x.y(); }, 2);
  EXPECT_LT((flux + div).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Loads, AffineLoadIsRuleIndependent) {
  const auto space = space_of(MeshFamily::XzSquare, 3);
  const auto f = [](const Vec2& x) { return 1.0 + 2.0 * x.x() - x.y(); };
  const Vector load1 = assemble_function_load(*space, f, 2);
  const Vector load4 = assemble_function_load(*space, f, 4);
  EXPECT_LT((load1 - load4).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hamiltonian, LoadIsAreaWeightedElementValue) {
  const auto space = space_of(MeshFamily::XzSquare, 3);
  const Hamiltonian h = huber_ball(1.0);
  const P1Function u(space, Vector::Random(space->num_dofs()));
  const Vector load = assemble_hamiltonian_load(u, h);
  Vector expected = Vector::Zero(space->num_dofs());
  for (int t = 0; t < space->num_elements(); ++t) {
    const double value = h.value(Vec2::Zero(), u.grad(t)) * space->elem_area(t) / 3.0;
    for (int d : space->elem_dofs(t)) {
      if (d != kBoundaryDof) expected[d] += value;
    }
  }
  EXPECT_LT((load - expected).cwiseAbs().maxCoeff(), 1e-15);
  const DriftField b = hamiltonian_drift(u, h);
  for (int t = 0; t < space->num_elements(); ++t) EXPECT_EQ(b[t], h.grad_p(Vec2::Zero(), u.grad(t)));
}

TEST(Hamiltonian, SpaceDependentLoadIsExactForAffineX) {
  const auto space = space_of(MeshFamily::XzSquare, 3);
  Hamiltonian h = huber_ball(1.0);
  h.x_independent = false;
  h.value = [](const Vec2& x, const Vec2&) { return x.x(); };
  const P1Function u(space, Vector::Zero(space->num_dofs()));
  const Vector load = assemble_hamiltonian_load(u, h);
  const Vector expected = assemble_function_load(*space, [](const Vec2& x) { return x.x(); }, 4);
  EXPECT_LT((load - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Residuals, ZeroHamiltonianResidualIsMassTimesDensity) {
  const auto space = space_of(MeshFamily::XzSquare, 3);
  const MFGProblem p = make_zero_problem(1.0, zero_hamiltonian(), 1.0);
  const auto tensor = zero_tensor(space->mesh());
  const DiscreteSystem sys(space, p, tensor);
  const P1Function m(space, Vector::Random(space->num_dofs()));
  const P1Function u(space, Vector::Zero(space->num_dofs()));
  const Vector r1 = assemble_hjb_nonlinear_residual(sys, u, m);
  EXPECT_LT((r1 - sys.mass * m.coeffs).cwiseAbs().maxCoeff(), 1e-15);
  const Vector r2 = assemble_kfp_residual(sys, u, m);
  EXPECT_LT((r2 + assemble_stiffness(*space) * m.coeffs).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Residuals, VanishAtExactSolutionUnderRefinement) {
  const MFGProblem p = make_sine_problem(1.0, huber_ball(1.0), 1.0, Domain::UnitSquare);
  double prev1 = 0.0;
  double prev2 = 0.0;
  for (int level = 2; level <= 5; ++level) {
    const auto space = space_of(MeshFamily::XzSquare, level);
    const auto tensor = zero_tensor(space->mesh());
    const DiscreteSystem sys(space, p, tensor);
    const P1Function u = interpolate(space, p.exact->u.value);
    const P1Function m = interpolate(space, p.exact->m.value);
    const DualNorm dual(sys.gram);
    const double r1 = dual(assemble_hjb_nonlinear_residual(sys, u, m));
    const double r2 = dual(assemble_kfp_residual(sys, u, m));
    if (level > 2) {
      EXPECT_GT(std::log2(prev1 / r1), 0.9) << level;
      EXPECT_GT(std::log2(prev2 / r2), 0.9) << level;
    }
    prev1 = r1;
    prev2 = r2;
  }
}

TEST(Coupling, NonlocalOperatorAddsKernel) {
  const auto space = space_of(MeshFamily::XzSquare, 2);
  const CouplingF c = nonlocal_gaussian_coupling(1.5, 0.5, 0.2, [](const Vec2&) { return 2.0; }, 1.0);
  const SparseMatrix mass = assemble_mass(*space);
  const CouplingOperator op(*space, c, mass);
  const Vector m = Vector::Random(space->num_dofs());
  const Vector expected = 1.5 * (mass * m) + assemble_kernel_matrix(*space, c) * m;
  EXPECT_LT((op.linear(m) - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((op.offset_load() - assemble_function_load(*space, [](const Vec2&) { return 2.0; })).norm(), 1e-15);
}

TEST(MatrixMarket, HeaderAndOneBasedEntries) {
  const auto space = space_of(MeshFamily::XzSquare, 1);
  const SparseMatrix k = assemble_stiffness(*space);
  std::ostringstream out;
  write_matrix_market(k, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "%%MatrixMarket matrix coordinate real general");
  std::getline(in, line);
  EXPECT_EQ(line, "1 1 1");
  std::getline(in, line);
  EXPECT_EQ(line, "1 1 4");
}
