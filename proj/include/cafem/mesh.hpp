#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cafem {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

enum class DomainTag { Cytosol, ER };
enum class BoundaryMarker { Outer, Interface };

std::string to_string(DomainTag tag);
std::string to_string(BoundaryMarker marker);

struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryMarker marker = BoundaryMarker::Outer;
  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Triangulated subdomain. Triangles are counterclockwise; boundary edges of
/// each marker form one closed polygon traversed counterclockwise.
struct Mesh2D {
  DomainTag domain = DomainTag::Cytosol;
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  /// Vertex indices of the marked polygon in traversal order (no repeat of the first).
  std::vector<int> boundary_loop(BoundaryMarker marker) const;

  friend bool operator==(const Mesh2D&, const Mesh2D&) = default;
};

/// Pairing of the interface ring between the two meshes. Entry k holds the
/// k-th ring vertex in counterclockwise arc order; ring edge k joins entries
/// k and (k+1) mod n.
struct InterfaceMap {
  std::vector<int> cytosol_nodes;
  std::vector<int> er_nodes;

  std::size_t size() const { return cytosol_nodes.size(); }
};

/// Cytosol annulus, ER disk and their shared interface ring.
struct Geometry {
  double r_inner = 0.0;
  double r_outer = 0.0;
  double h = 0.0;
  Mesh2D cytosol;
  Mesh2D er;
  InterfaceMap interface;
};

/// Number of equal arcs used for a circle of radius r at target size h.
int ring_node_count(double r, double h);

/// Number of radial layers covering a length at target size h: the smallest
/// power of two giving layers no thicker than h.
int layer_count(double length, double h);

/// Triangle count the polar generator produces for the given domain.
std::size_t expected_triangle_count(double r_inner, double r_outer, double h, DomainTag domain);

/// Structured polar triangulation of the concentric-circle cell geometry.
/// Throws InputError unless 0 < r_inner < r_outer and 0 < h < r_inner.
Geometry generate_geometry(double r_inner, double r_outer, double h);

struct MeshDiagnostics {
  double min_area = 0.0;
  double max_area = 0.0;
  double min_angle_deg = 0.0;
  double max_edge = 0.0;
  std::size_t orientation_violations = 0;
  std::size_t index_violations = 0;
  std::size_t dangling_boundary_edges = 0;  // marked edges not owned by exactly one triangle
  std::size_t unmarked_free_edges = 0;      // single-triangle edges that carry no marker
  bool interface_closed = false;
  bool outer_closed = false;

  /// True when every Mesh2D invariant holds for the mesh's domain tag.
  bool ok(DomainTag domain) const;
};

MeshDiagnostics validate_mesh(const Mesh2D& mesh);

void write_mesh(const Mesh2D& mesh, std::ostream& out);
void write_mesh(const Mesh2D& mesh, const std::filesystem::path& path);
Mesh2D read_mesh(std::istream& in);
Mesh2D read_mesh(const std::filesystem::path& path);

}  // namespace cafem
