#include "mfg/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  return 0.5 * cross(p1 - p0, p2 - p0);
}

// Interior angle at corner c of the triangle (c, a, b).
double corner_angle(const Vec2& c, const Vec2& a, const Vec2& b) {
  const Vec2 u = a - c;
  const Vec2 v = b - c;
  return std::atan2(std::abs(cross(u, v)), u.dot(v));
}

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

Mesh2D::Mesh2D(std::vector<Vec2> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = num_vertices();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) {
        throw GeometryError("triangle " + std::to_string(t) + " references vertex " +
                            std::to_string(v) + " outside [0, " + std::to_string(nv) + ")");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw GeometryError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    const double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (!(std::abs(a) > 0.0) || !std::isfinite(a)) {
      throw GeometryError("triangle " + std::to_string(t) + " has zero area");
    }
    if (a < 0.0) std::swap(tri[1], tri[2]);
  }
  build_connectivity();
}

void Mesh2D::build_connectivity() {
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(triangles_.size() * 2);
  // +1 when the triangle traverses the edge from a to b, -1 otherwise.
  std::vector<std::array<int, 2>> direction;
  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});

  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const int p = tri[(i + 1) % 3];
      const int q = tri[(i + 2) % 3];
      const int a = std::min(p, q);
      const int b = std::max(p, q);
      const int dir = (p == a) ? 1 : -1;
      auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.a = a;
        e.b = b;
        edges_.push_back(e);
        direction.push_back({0, 0});
      }
      Edge& e = edges_[it->second];
      if (e.num_triangles == 2) {
        throw GeometryError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") is shared by more than two triangles");
      }
      if (e.num_triangles == 1 && direction[it->second][0] == dir) {
        throw GeometryError("triangles " + std::to_string(e.triangles[0]) + " and " +
                            std::to_string(t) + " overlap across edge (" + std::to_string(a) +
                            "," + std::to_string(b) + ")");
      }
      direction[it->second][e.num_triangles] = dir;
      e.triangles[e.num_triangles++] = t;
      triangle_edges_[t][i] = it->second;
    }
  }

  boundary_.assign(vertices_.size(), false);
  for (const auto& e : edges_) {
    if (e.on_boundary()) {
      boundary_[e.a] = true;
      boundary_[e.b] = true;
    }
  }
}

double Mesh2D::area(int t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh2D::diameter(int t) const {
  const auto& tri = triangles_[t];
  const Vec2& p0 = vertices_[tri[0]];
  const Vec2& p1 = vertices_[tri[1]];
  const Vec2& p2 = vertices_[tri[2]];
  return std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
}

double Mesh2D::inradius(int t) const {
  const auto& tri = triangles_[t];
  const Vec2& p0 = vertices_[tri[0]];
  const Vec2& p1 = vertices_[tri[1]];
  const Vec2& p2 = vertices_[tri[2]];
  const double perimeter = (p1 - p0).norm() + (p2 - p1).norm() + (p0 - p2).norm();
  return 2.0 * area(t) / perimeter;
}

double Mesh2D::edge_length(int e) const {
  return (vertices_[edges_[e].b] - vertices_[edges_[e].a]).norm();
}

Vec2 Mesh2D::edge_tangent(int e) const {
  return (vertices_[edges_[e].b] - vertices_[edges_[e].a]).normalized();
}

Vec2 Mesh2D::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

double Mesh2D::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t) sum += area(t);
  return sum;
}

MeshPtr generate_structured_square(int n) {
  if (n < 1) throw ConfigError("generate_structured_square: n must be >= 1");
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  std::vector<Triangle> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return std::make_shared<const Mesh2D>(std::move(vertices), std::move(triangles));
}

MeshPtr generate_acute_rhombus(int n) {
  if (n < 1) throw ConfigError("generate_acute_rhombus: n must be >= 1");
  const double half_sqrt3 = 0.5 * std::numbers::sqrt3;
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double s = static_cast<double>(i) / n;
      const double t = static_cast<double>(j) / n;
      vertices.emplace_back(s + 0.5 * t, half_sqrt3 * t);
    }
  }
  std::vector<Triangle> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // split along the short diagonal so both halves are equilateral
      triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
      triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return std::make_shared<const Mesh2D>(std::move(vertices), std::move(triangles));
}

MeshPtr refine_red(const MeshPtr& mesh) {
  const Mesh2D& coarse = *mesh;
  const int nv = coarse.num_vertices();
  std::vector<Vec2> vertices(coarse.vertices());
  vertices.reserve(static_cast<std::size_t>(nv + coarse.num_edges()));
  std::vector<std::array<int, 2>> lineage(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) lineage[v] = {v, v};
  for (const auto& e : coarse.edges()) {
    vertices.push_back(0.5 * (coarse.vertex(e.a) + coarse.vertex(e.b)));
    lineage.push_back({e.a, e.b});
  }

  std::vector<Triangle> triangles;
  std::vector<int> parents;
  triangles.reserve(4 * static_cast<std::size_t>(coarse.num_triangles()));
  parents.reserve(triangles.capacity());
  for (int t = 0; t < coarse.num_triangles(); ++t) {
    const auto& tri = coarse.triangle(t);
    const auto& te = coarse.triangle_edges(t);
    // m[i] is the midpoint of the edge opposite local vertex i
    const int m0 = nv + te[0];
    const int m1 = nv + te[1];
    const int m2 = nv + te[2];
    triangles.push_back({tri[0], m2, m1});
    triangles.push_back({m2, tri[1], m0});
    triangles.push_back({m1, m0, tri[2]});
    triangles.push_back({m0, m1, m2});
    parents.insert(parents.end(), 4, t);
  }

  auto fine = std::make_shared<Mesh2D>(std::move(vertices), std::move(triangles));
  fine->parent_ = mesh;
  fine->level_ = coarse.level() + 1;
  fine->vertex_lineage_ = std::move(lineage);
  fine->parent_triangle_ = std::move(parents);
  return fine;
}

XzResult check_xz(const Mesh2D& mesh) {
  XzResult result;
  result.worst_sum = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.edges()) {
    if (e.num_triangles != 2) continue;
    double sum = 0.0;
    for (int t : e.triangles) {
      const auto& tri = mesh.triangle(t);
      int c = tri[0];
      for (int v : tri) {
        if (v != e.a && v != e.b) c = v;
      }
      const Vec2 u = mesh.vertex(e.a) - mesh.vertex(c);
      const Vec2 w = mesh.vertex(e.b) - mesh.vertex(c);
      const double twice_area = std::abs(cross(u, w));
      if (!(twice_area > 0.0)) {
        throw GeometryError("check_xz: degenerate triangle " + std::to_string(t));
      }
      sum += u.dot(w) / twice_area;
    }
    result.worst_sum = std::min(result.worst_sum, sum);
  }
  result.satisfied = result.worst_sum >= -kGeomTol;
  return result;
}

double check_acute(const Mesh2D& mesh) {
  double max_angle = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const Vec2& p0 = mesh.vertex(tri[0]);
    const Vec2& p1 = mesh.vertex(tri[1]);
    const Vec2& p2 = mesh.vertex(tri[2]);
    if (!(std::abs(signed_area(p0, p1, p2)) > 0.0)) {
      throw GeometryError("check_acute: degenerate triangle " + std::to_string(t));
    }
    max_angle = std::max({max_angle, corner_angle(p0, p1, p2), corner_angle(p1, p2, p0),
                          corner_angle(p2, p0, p1)});
  }
  const double theta = 0.5 * std::numbers::pi - max_angle;
  return theta > kGeomTol ? theta : 0.0;
}

double mesh_size(const Mesh2D& mesh) {
  double h = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) h = std::max(h, mesh.diameter(t));
  return h;
}

double shape_regularity(const Mesh2D& mesh) {
  double delta = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    delta = std::max(delta, mesh.diameter(t) / mesh.inradius(t));
  }
  return delta;
}

MeshQualityReport mesh_quality(const Mesh2D& mesh) {
  MeshQualityReport report;
  report.h_max = mesh_size(mesh);
  report.shape_regularity = shape_regularity(mesh);
  const XzResult xz = check_xz(mesh);
  report.xz_satisfied = xz.satisfied;
  report.xz_worst_edge_sum = xz.worst_sum;
  report.acute_theta = check_acute(mesh);
  return report;
}

MeshPtr family_mesh(MeshFamily family, int level) {
  if (level < 0) throw ConfigError("mesh level must be >= 0");
  MeshPtr mesh = family == MeshFamily::XzSquare ? generate_structured_square(1)
                                                : generate_acute_rhombus(1);
  for (int k = 0; k < level; ++k) mesh = refine_red(mesh);
  return mesh;
}

std::vector<MeshPtr> refinement_hierarchy(MeshPtr base, int max_level) {
  std::vector<MeshPtr> meshes{std::move(base)};
  for (int k = 0; k < max_level; ++k) meshes.push_back(refine_red(meshes.back()));
  return meshes;
}

MeshPtr read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'", 0);
  return read_mesh(in);
}

MeshPtr read_mesh(std::istream& in) {
  int line_no = 0;
  std::string line;
  // next non-blank, non-comment line
  auto next = [&](const char* expected) -> std::istringstream {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return std::istringstream(line);
    }
    throw ParseError(std::string("unexpected end of file, expected ") + expected, line_no);
  };
  auto expect_end = [&](std::istringstream& ss) {
    std::string extra;
    if (ss >> extra) throw ParseError("unexpected trailing token '" + extra + "'", line_no);
  };
  auto read_count = [&](const char* keyword) {
    auto ss = next(keyword);
    std::string word;
    long long count = -1;
    if (!(ss >> word) || word != keyword || !(ss >> count) || count < 0) {
      throw ParseError(std::string("expected '") + keyword + " <count>'", line_no);
    }
    expect_end(ss);
    return count;
  };

  {
    auto ss = next("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic) || magic != "MFGMESH" || !(ss >> version) || version != 1) {
      throw ParseError("malformed header, expected 'MFGMESH 1'", line_no);
    }
    expect_end(ss);
  }

  const long long nv = read_count("vertices");
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    auto ss = next("vertex coordinates");
    double x = 0.0;
    double y = 0.0;
    if (!(ss >> x >> y) || !std::isfinite(x) || !std::isfinite(y)) {
      throw ParseError("malformed vertex line", line_no);
    }
    expect_end(ss);
    vertices.emplace_back(x, y);
  }

  const long long nt = read_count("triangles");
  const int triangles_line = line_no;
  std::vector<Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(nt));
  for (long long i = 0; i < nt; ++i) {
    auto ss = next("triangle indices");
    long long a = 0, b = 0, c = 0;
    if (!(ss >> a >> b >> c)) throw ParseError("malformed triangle line", line_no);
    expect_end(ss);
    for (long long v : {a, b, c}) {
      if (v < 0 || v >= nv) {
        throw ParseError("vertex index " + std::to_string(v) + " out of range [0, " +
                             std::to_string(nv) + ")",
                         line_no);
      }
    }
    triangles.push_back({static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)});
  }

  try {
    return std::make_shared<const Mesh2D>(std::move(vertices), std::move(triangles));
  } catch (const GeometryError& e) {
    throw ParseError(std::string("invalid connectivity: ") + e.what(), triangles_line);
  }
}

void write_mesh(const Mesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mesh file '" + path + "'");
  write_mesh(mesh, out);
}

void write_mesh(const Mesh2D& mesh, std::ostream& out) {
  const auto old_precision = out.precision();
  out << "MFGMESH 1\n";
  out << "vertices " << mesh.num_vertices() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  out << "triangles " << mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out.precision(old_precision);
}

}  // namespace mfg
