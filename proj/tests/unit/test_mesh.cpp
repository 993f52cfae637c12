#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/mesh.hpp"

using namespace mfg;

namespace {

double pi() { return std::numbers::pi; }

// Kite: shared edge (-1,0)-(1,0), apexes (0,+-b) seeing the edge under 100 degrees.
MeshPtr kite_100() {
  const double b = 1.0 / std::tan(50.0 * pi() / 180.0);
  std::vector<Vec2> v{{-1, 0}, {1, 0}, {0, b}, {0, -b}};
  return std::make_shared<const Mesh2D>(v, std::vector<Triangle>{{0, 1, 2}, {1, 0, 3}});
}

}  // namespace

TEST(StructuredSquare, CountsForTwoByTwo) {
  const auto m = generate_structured_square(2);
  EXPECT_EQ(m->num_vertices(), 9);
  EXPECT_EQ(m->num_triangles(), 8);
  EXPECT_EQ(m->num_edges(), 16);
  int interior = 0;
  for (int v = 0; v < m->num_vertices(); ++v) interior += m->is_boundary_vertex(v) ? 0 : 1;
  EXPECT_EQ(interior, 1);
  EXPECT_NEAR(m->total_area(), 1.0, 1e-15);
}

TEST(StructuredSquare, AllTrianglesCounterClockwise) {
  const auto m = generate_structured_square(3);
  for (int t = 0; t < m->num_triangles(); ++t) {
    const auto& tri = m->triangle(t);
    const Vec2 a = m->vertex(tri[1]) - m->vertex(tri[0]);
    const Vec2 b = m->vertex(tri[2]) - m->vertex(tri[0]);
    EXPECT_GT(a.x() * b.y() - a.y() * b.x(), 0.0);
  }
}

TEST(Mesh2D, ClockwiseInputIsReoriented) {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
  const Mesh2D m(v, {{0, 2, 1}});
  EXPECT_NEAR(m.area(0), 0.5, 1e-15);
}

TEST(Mesh2D, DegenerateTriangleRejected) {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {2, 0}};
  EXPECT_THROW(Mesh2D(v, {{0, 1, 2}}), GeometryError);
}

TEST(Mesh2D, RepeatedVertexRejected) {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(Mesh2D(v, {{0, 1, 1}}), GeometryError);
}

TEST(Mesh2D, EdgeSharedByThreeTrianglesRejected) {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 2}};
  EXPECT_THROW(Mesh2D(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}), GeometryError);
}

TEST(Mesh2D, GeometryOfReferenceTriangle) {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
  const Mesh2D m(v, {{0, 1, 2}});
  EXPECT_NEAR(m.area(0), 0.5, 1e-15);
  EXPECT_NEAR(m.diameter(0), std::sqrt(2.0), 1e-15);
  // inradius of the right isosceles triangle with legs 1: (2 - sqrt 2) / 2
  EXPECT_NEAR(m.inradius(0), (2.0 - std::sqrt(2.0)) / 2.0, 1e-15);
  EXPECT_NEAR(m.centroid(0).x(), 1.0 / 3.0, 1e-15);
}

TEST(CheckXz, KiteWithObtuseOppositeAnglesFails) {
  const auto m = kite_100();
  const XzResult r = check_xz(*m);
  EXPECT_FALSE(r.satisfied);
  EXPECT_NEAR(r.worst_sum, 2.0 / std::tan(100.0 * pi() / 180.0), 1e-12);
  EXPECT_NEAR(r.worst_sum, -0.35265396141, 1e-10);
}

TEST(CheckXz, StructuredSquareSatisfiesWithZeroSum) {
  for (int level = 1; level <= 4; ++level) {
    const XzResult r = check_xz(*family_mesh(MeshFamily::XzSquare, level));
    EXPECT_TRUE(r.satisfied);
    // right angles on both sides of every diagonal: cot(90) + cot(90) = 0
    EXPECT_NEAR(r.worst_sum, 0.0, 1e-12);
  }
}

TEST(CheckXz, SingleTriangleHasNoSharedEdge) {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
  const Mesh2D m(v, {{0, 1, 2}});
  const XzResult r = check_xz(m);
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(std::isinf(r.worst_sum));
}

TEST(CheckAcute, RhombusIsThirtyDegreesFromRight) {
  for (int level = 0; level <= 3; ++level) {
    EXPECT_NEAR(check_acute(*family_mesh(MeshFamily::AcuteRhombus, level)), pi() / 6.0, 1e-12);
  }
}

TEST(CheckAcute, RightTrianglesGiveZero) {
  EXPECT_EQ(check_acute(*family_mesh(MeshFamily::XzSquare, 2)), 0.0);
}

TEST(ShapeRegularity, ClosedFormsForBothFamilies) {
  // diam / inradius: right isosceles 2 + 2 sqrt 2, equilateral 2 sqrt 3
  for (int level = 0; level <= 3; ++level) {
    EXPECT_NEAR(shape_regularity(*family_mesh(MeshFamily::XzSquare, level)),
                2.0 + 2.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(shape_regularity(*family_mesh(MeshFamily::AcuteRhombus, level)),
                2.0 * std::sqrt(3.0), 1e-12);
  }
}

TEST(RefineRed, CountsAndMeshSizeHalve) {
  MeshPtr m = family_mesh(MeshFamily::XzSquare, 0);
  for (int level = 1; level <= 5; ++level) {
    const MeshPtr fine = refine_red(m);
    const int n = 1 << level;
    EXPECT_EQ(fine->num_vertices(), (n + 1) * (n + 1));
    EXPECT_EQ(fine->num_triangles(), 2 * n * n);
    EXPECT_EQ(fine->level(), level);
    EXPECT_NEAR(mesh_size(*fine), 0.5 * mesh_size(*m), 1e-15);
    EXPECT_NEAR(fine->total_area(), 1.0, 1e-13);
    m = fine;
  }
}

TEST(RefineRed, ChildrenAreSimilarWithQuarterArea) {
  const MeshPtr coarse = family_mesh(MeshFamily::AcuteRhombus, 1);
  const MeshPtr fine = refine_red(coarse);
  for (int t = 0; t < fine->num_triangles(); ++t) {
    const int parent = fine->parent_triangles()[t];
    EXPECT_NEAR(fine->area(t), coarse->area(parent) / 4.0, 1e-15);
    EXPECT_NEAR(fine->diameter(t), coarse->diameter(parent) / 2.0, 1e-15);
  }
}

TEST(RefineRed, LineageGivesMidpoints) {
  const MeshPtr coarse = family_mesh(MeshFamily::XzSquare, 1);
  const MeshPtr fine = refine_red(coarse);
  ASSERT_EQ(fine->parent().get(), coarse.get());
  const auto& lineage = fine->vertex_lineage();
  ASSERT_EQ(static_cast<int>(lineage.size()), fine->num_vertices());
  for (int v = 0; v < fine->num_vertices(); ++v) {
    const Vec2 mid = 0.5 * (coarse->vertex(lineage[v][0]) + coarse->vertex(lineage[v][1]));
    EXPECT_NEAR((fine->vertex(v) - mid).norm(), 0.0, 1e-15);
  }
  for (int v = 0; v < coarse->num_vertices(); ++v) {
    EXPECT_EQ(lineage[v][0], v);
    EXPECT_EQ(lineage[v][1], v);
  }
}

TEST(RefineRed, PreservesXzAndAcuteness) {
  EXPECT_TRUE(mesh_quality(*family_mesh(MeshFamily::XzSquare, 4)).xz_satisfied);
  const auto q = mesh_quality(*family_mesh(MeshFamily::AcuteRhombus, 4));
  EXPECT_TRUE(q.xz_satisfied);
  EXPECT_NEAR(q.acute_theta, pi() / 6.0, 1e-12);
}

TEST(MeshIo, RoundTripIsExact) {
  const MeshPtr m = family_mesh(MeshFamily::AcuteRhombus, 2);
  std::stringstream buffer;
  write_mesh(*m, buffer);
  const MeshPtr back = read_mesh(buffer);
  ASSERT_EQ(back->num_vertices(), m->num_vertices());
  ASSERT_EQ(back->num_triangles(), m->num_triangles());
  for (int v = 0; v < m->num_vertices(); ++v) EXPECT_EQ(back->vertex(v), m->vertex(v));
  for (int t = 0; t < m->num_triangles(); ++t) EXPECT_EQ(back->triangle(t), m->triangle(t));
}

TEST(MeshIo, CommentsAndBlankLinesAreSkipped) {
  std::istringstream in("# test mesh\nMFGMESH 1\n\nvertices 3\n0 0\n1 0\n# apex\n0 1\ntriangles 1\n0 1 2\n");
  EXPECT_EQ(read_mesh(in)->num_triangles(), 1);
}

TEST(MeshIo, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_mesh(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("MFGMESH 2\n"), 1);
  EXPECT_EQ(line_of("MFGMESH 1\nvertices 3\n0 0\n1 x\n0 1\ntriangles 1\n0 1 2\n"), 4);
  EXPECT_EQ(line_of("MFGMESH 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 3\n"), 7);
  EXPECT_EQ(line_of("MFGMESH 1\nvertices 3\n0 0\n1 0\n2 0\ntriangles 1\n0 1 2\n"), 6);
  EXPECT_EQ(line_of("MFGMESH 1\nvertices 3\n0 0\n"), 3);
}

TEST(MeshIo, MissingFileIsParseError) {
  EXPECT_THROW(read_mesh(std::string("/nonexistent/mesh.txt")), ParseError);
}
