#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "cafem/errors.hpp"
#include "cafem/mesh.hpp"

using namespace cafem;

namespace {

constexpr double kPi = std::numbers::pi;

// Undirected edge set recounted from the triangle list (independent of the
// generator's own bookkeeping).
std::size_t count_edges(const Mesh2D& m) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return edges.size();
}

// Shoelace area of a closed polygon given by vertex indices.
double polygon_area(const Mesh2D& m, const std::vector<int>& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point2 p = m.vertices[loop[i]], q = m.vertices[loop[(i + 1) % loop.size()]];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

double triangle_area(const Mesh2D& m, const std::array<int, 3>& t) {
  const Point2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

TEST(MeshGeneration, InterfaceRingHasSixteenNodesAtPiOverEight) {
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 8);
  EXPECT_EQ(g.interface.size(), 16u);
  EXPECT_EQ(g.cytosol.boundary_loop(BoundaryMarker::Interface).size(), 16u);
  EXPECT_EQ(g.er.boundary_loop(BoundaryMarker::Interface).size(), 16u);
}

TEST(MeshGeneration, InterfacePairsAreBitwiseIdentical) {
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 8);
  double max_distance = 0.0;
  for (std::size_t k = 0; k < g.interface.size(); ++k) {
    const Point2 a = g.cytosol.vertices[g.interface.cytosol_nodes[k]];
    const Point2 b = g.er.vertices[g.interface.er_nodes[k]];
    EXPECT_EQ(a, b);
    max_distance = std::max(max_distance, std::hypot(a.x - b.x, a.y - b.y));
  }
  EXPECT_EQ(max_distance, 0.0);
}

TEST(MeshGeneration, EveryInterfaceNodeIsPairedExactlyOnce) {
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 16);
  const auto cl = g.cytosol.boundary_loop(BoundaryMarker::Interface);
  const auto el = g.er.boundary_loop(BoundaryMarker::Interface);
  EXPECT_EQ(std::set<int>(cl.begin(), cl.end()),
            std::set<int>(g.interface.cytosol_nodes.begin(), g.interface.cytosol_nodes.end()));
  EXPECT_EQ(std::set<int>(el.begin(), el.end()), std::set<int>(g.interface.er_nodes.begin(), g.interface.er_nodes.end()));
  EXPECT_EQ(std::set<int>(cl.begin(), cl.end()).size(), cl.size());
}

TEST(MeshGeneration, TriangleCountsMatchClosedFormAndEulerCharacteristic) {
  for (double h : {kPi / 8, kPi / 16, kPi / 32}) {
    const Geometry g = generate_geometry(1.0, 2.0, h);
    EXPECT_EQ(g.er.num_triangles(), expected_triangle_count(1.0, 2.0, h, DomainTag::ER));
    EXPECT_EQ(g.cytosol.num_triangles(), expected_triangle_count(1.0, 2.0, h, DomainTag::Cytosol));
    auto euler = [](const Mesh2D& m) {
      return static_cast<long>(m.num_vertices()) - static_cast<long>(count_edges(m)) +
             static_cast<long>(m.num_triangles());
    };
    EXPECT_EQ(euler(g.er), 1) << "disk";
    EXPECT_EQ(euler(g.cytosol), 0) << "annulus";
  }
}

TEST(MeshGeneration, TriangleAreasSumToShoelaceAreaOfBoundaryPolygons) {
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 16);
  double er = 0.0, cyto = 0.0;
  for (const auto& t : g.er.triangles) er += triangle_area(g.er, t);
  for (const auto& t : g.cytosol.triangles) cyto += triangle_area(g.cytosol, t);
  const double disk = polygon_area(g.er, g.er.boundary_loop(BoundaryMarker::Interface));
  const double outer = polygon_area(g.cytosol, g.cytosol.boundary_loop(BoundaryMarker::Outer));
  const double hole = polygon_area(g.cytosol, g.cytosol.boundary_loop(BoundaryMarker::Interface));
  EXPECT_NEAR(er, disk, 1e-12);
  // Both loops are stored counterclockwise; the annulus is the difference.
  EXPECT_NEAR(cyto, outer - hole, 1e-12);
  EXPECT_NEAR(hole, disk, 1e-15);
}

TEST(MeshGeneration, BoundaryVerticesLieOnTheirCircles) {
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 32);
  for (int v : g.cytosol.boundary_loop(BoundaryMarker::Outer))
    EXPECT_NEAR(std::hypot(g.cytosol.vertices[v].x, g.cytosol.vertices[v].y), 2.0, 4e-16);
  for (int v : g.er.boundary_loop(BoundaryMarker::Interface))
    EXPECT_NEAR(std::hypot(g.er.vertices[v].x, g.er.vertices[v].y), 1.0, 2e-16);
}

TEST(MeshGeneration, RefinementDoublesInterfaceRing) {
  std::size_t prev = 0;
  for (double h : {kPi / 8, kPi / 16, kPi / 32, kPi / 64}) {
    const std::size_t n = generate_geometry(1.0, 2.0, h).interface.size();
    if (prev) {
      EXPECT_EQ(n, 2 * prev);
    }
    prev = n;
  }
}

TEST(MeshGeneration, LayersAreNoThickerThanHAndEdgesBounded) {
  for (double h : {kPi / 8, kPi / 24, 0.3}) {
    EXPECT_LE(1.0 / layer_count(1.0, h), h);
    EXPECT_LE(0.8 / layer_count(0.8, h), h);
    const Geometry g = generate_geometry(1.2, 2.0, h);
    EXPECT_LE(validate_mesh(g.cytosol).max_edge, 2.0 * h);
    EXPECT_LE(validate_mesh(g.er).max_edge, 2.0 * h);
  }
}

TEST(MeshGeneration, GeneratedMeshesValidate) {
  for (double h : {kPi / 8, kPi / 16, kPi / 48}) {
    const Geometry g = generate_geometry(1.0, 2.0, h);
    const auto dc = validate_mesh(g.cytosol), de = validate_mesh(g.er);
    EXPECT_TRUE(dc.ok(DomainTag::Cytosol));
    EXPECT_TRUE(de.ok(DomainTag::ER));
    EXPECT_EQ(dc.orientation_violations + de.orientation_violations, 0u);
    EXPECT_EQ(dc.dangling_boundary_edges + de.dangling_boundary_edges, 0u);
    EXPECT_GT(dc.min_area, 0.0);
  }
}

TEST(MeshGeneration, MinimumAngleRegressionFloorAtPiOver32) {
  // Observed on the generator's output: 32.89 deg (cytosol), 33.29 deg (ER).
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 32);
  EXPECT_GE(validate_mesh(g.cytosol).min_angle_deg, 32.8);
  EXPECT_GE(validate_mesh(g.er).min_angle_deg, 33.2);
}

TEST(MeshGeneration, RejectsInvalidArguments) {
  EXPECT_THROW(generate_geometry(0.0, 2.0, 0.1), InputError);
  EXPECT_THROW(generate_geometry(1.0, -2.0, 0.1), InputError);
  EXPECT_THROW(generate_geometry(1.0, 2.0, 0.0), InputError);
  EXPECT_THROW(generate_geometry(2.0, 1.0, 0.1), InputError);
  EXPECT_THROW(generate_geometry(1.0, 2.0, 1.0), InputError);
}

TEST(MeshValidation, SwappedTriangleIsOneOrientationViolation) {
  Geometry g = generate_geometry(1.0, 2.0, kPi / 8);
  std::swap(g.cytosol.triangles[5][0], g.cytosol.triangles[5][1]);
  const auto d = validate_mesh(g.cytosol);
  EXPECT_EQ(d.orientation_violations, 1u);
  EXPECT_FALSE(d.ok(DomainTag::Cytosol));
}

TEST(MeshValidation, MissingBoundaryEdgeIsReported) {
  Geometry g = generate_geometry(1.0, 2.0, kPi / 8);
  g.er.boundary.pop_back();
  const auto d = validate_mesh(g.er);
  EXPECT_EQ(d.unmarked_free_edges, 1u);
  EXPECT_FALSE(d.interface_closed);
  EXPECT_FALSE(d.ok(DomainTag::ER));
}

TEST(MeshIo, RoundTripIsLossless) {
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 8);
  for (const Mesh2D* m : {&g.cytosol, &g.er}) {
    std::stringstream s;
    write_mesh(*m, s);
    EXPECT_EQ(read_mesh(s), *m);
  }
}

TEST(MeshIo, HeaderNamesDomain) {
  const Geometry g = generate_geometry(1.0, 2.0, kPi / 8);
  std::stringstream s;
  write_mesh(g.er, s);
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "calmesh v1 er");
}

TEST(MeshIo, OutOfRangeIndexIsStructuralError) {
  std::stringstream s("calmesh v1 er\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 1000000000\nboundary 0\n");
  EXPECT_THROW(read_mesh(s), StructuralError);
}

TEST(MeshIo, EmptyFileIsParseError) {
  std::stringstream s("");
  EXPECT_THROW(read_mesh(s), ParseError);
}

TEST(MeshIo, MalformedLineNamesLineNumber) {
  std::stringstream s("calmesh v1 er\nvertices 2\n0 0\n1 zero\n");
  try {
    read_mesh(s);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}
