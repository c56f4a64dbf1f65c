#include "cafem/fem.hpp"

#include <cmath>
#include <string>

#include "cafem/errors.hpp"

namespace cafem::fem {

const TriangleRule& midpoint_rule() {
  static const TriangleRule rule{{{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  return rule;
}

const EdgeRule& gauss2_rule() {
  static const EdgeRule rule{{0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}, {0.5, 0.5}};
  return rule;
}

double signed_area(Point2 a, Point2 b, Point2 c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

LocalMatrix element_mass(Point2 a, Point2 b, Point2 c) {
  const double s = signed_area(a, b, c) / 12.0;
  LocalMatrix m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = (i == j ? 2.0 : 1.0) * s;
  return m;
}

LocalMatrix element_stiffness(Point2 a, Point2 b, Point2 c) {
  const double area = signed_area(a, b, c);
  // gradient of barycentric i is (by[i], cx[i]) / (2 area)
  const double by[3] = {b.y - c.y, c.y - a.y, a.y - b.y};
  const double cx[3] = {c.x - b.x, a.x - c.x, b.x - a.x};
  LocalMatrix k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = (by[i] * by[j] + cx[i] * cx[j]) / (4.0 * area);
  return k;
}

namespace {

template <typename LocalFn>
SparseMatrixSym assemble_volume(const Mesh2D& mesh, LocalFn local) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    if (!(signed_area(a, b, c) > 0.0))
      throw StructuralError("triangle " + std::to_string(t) + " has non-positive area");
    const LocalMatrix m = local(a, b, c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.push_back({tri[i], tri[j], m[i][j]});
  }
  return SparseMatrixSym::from_triplets(mesh.vertices.size(), trip);
}

bool has_marker(const Mesh2D& mesh, BoundaryMarker marker) {
  for (const auto& e : mesh.boundary)
    if (e.marker == marker) return true;
  return false;
}

}  // namespace

SparseMatrixSym assemble_mass(const Mesh2D& mesh) { return assemble_volume(mesh, element_mass); }

SparseMatrixSym assemble_stiffness(const Mesh2D& mesh) { return assemble_volume(mesh, element_stiffness); }

SparseMatrixSym assemble_boundary_mass(const Mesh2D& mesh, BoundaryMarker marker) {
  if (!has_marker(mesh, marker)) throw InputError("mesh has no '" + to_string(marker) + "' boundary");
  std::vector<Triplet> trip;
  for (const auto& e : mesh.boundary) {
    if (e.marker != marker) continue;
    const Point2 a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) trip.push_back({e.v[i], e.v[j], (i == j ? 2.0 : 1.0) * len / 6.0});
  }
  return SparseMatrixSym::from_triplets(mesh.vertices.size(), trip);
}

EdgeQuadrature edge_quadrature(const Mesh2D& mesh, BoundaryMarker marker) {
  if (!has_marker(mesh, marker)) throw InputError("mesh has no '" + to_string(marker) + "' boundary");
  const bool domain_outside_loop = mesh.domain == DomainTag::Cytosol && marker == BoundaryMarker::Interface;
  const auto& rule = gauss2_rule();
  EdgeQuadrature q;
  std::size_t edge = 0;
  for (const auto& e : mesh.boundary) {
    if (e.marker != marker) continue;
    const Point2 a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
    const double dx = b.x - a.x, dy = b.y - a.y, len = std::hypot(dx, dy);
    // right-hand normal of a counterclockwise loop points out of the loop
    double nx = dy / len, ny = -dx / len;
    if (domain_outside_loop) nx = -nx, ny = -ny;
    for (int g = 0; g < 2; ++g) {
      const double s = rule.points[g];
      q.points.push_back({a.x + s * dx, a.y + s * dy, edge, e.v, s, nx, ny});
      q.weights.push_back(rule.weights[g] * len);
    }
    ++edge;
  }
  return q;
}

VolumeQuadrature volume_quadrature(const Mesh2D& mesh) {
  const auto& rule = midpoint_rule();
  VolumeQuadrature q;
  q.points.reserve(mesh.triangles.size() * 3);
  q.weights.reserve(mesh.triangles.size() * 3);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double area = signed_area(a, b, c);
    for (int k = 0; k < 3; ++k) {
      const auto& w = rule.points[k];
      q.points.push_back({w[0] * a.x + w[1] * b.x + w[2] * c.x, w[0] * a.y + w[1] * b.y + w[2] * c.y, t, tri, w});
      q.weights.push_back(rule.weights[k] * area);
    }
  }
  return q;
}

void add_boundary_load(const EdgeQuadrature& quad, const EdgeEvaluator& g, std::span<double> load) {
  for (std::size_t k = 0; k < quad.points.size(); ++k) {
    const EdgePoint& p = quad.points[k];
    const double value = g(p);
    if (!std::isfinite(value)) throw Error("non-finite boundary flux on edge " + std::to_string(p.edge));
    const double wv = quad.weights[k] * value;
    load[p.nodes[0]] += wv * (1.0 - p.s);
    load[p.nodes[1]] += wv * p.s;
  }
}

std::vector<double> assemble_boundary_load(const Mesh2D& mesh, BoundaryMarker marker, const EdgeEvaluator& g) {
  std::vector<double> load(mesh.vertices.size(), 0.0);
  add_boundary_load(edge_quadrature(mesh, marker), g, load);
  return load;
}

void add_volume_load(const VolumeQuadrature& quad, const VolumeEvaluator& f, std::span<double> load) {
  for (std::size_t k = 0; k < quad.points.size(); ++k) {
    const TrianglePoint& p = quad.points[k];
    const double value = f(p);
    if (!std::isfinite(value)) throw Error("non-finite volume source in triangle " + std::to_string(p.triangle));
    const double wv = quad.weights[k] * value;
    for (int i = 0; i < 3; ++i) load[p.nodes[i]] += wv * p.bary[i];
  }
}

std::vector<double> assemble_volume_load(const Mesh2D& mesh, const VolumeEvaluator& f) {
  std::vector<double> load(mesh.vertices.size(), 0.0);
  add_volume_load(volume_quadrature(mesh), f, load);
  return load;
}

double mesh_area(const Mesh2D& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) area += signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  return area;
}

AssembledOperators assemble_operators(const Mesh2D& mesh) {
  AssembledOperators ops;
  ops.mass = assemble_mass(mesh);
  ops.stiffness = assemble_stiffness(mesh);
  if (has_marker(mesh, BoundaryMarker::Outer)) ops.outer_mass = assemble_boundary_mass(mesh, BoundaryMarker::Outer);
  if (has_marker(mesh, BoundaryMarker::Interface))
    ops.interface_mass = assemble_boundary_mass(mesh, BoundaryMarker::Interface);
  ops.area = mesh_area(mesh);
  return ops;
}

}  // namespace cafem::fem
