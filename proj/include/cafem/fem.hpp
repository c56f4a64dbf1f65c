#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cafem/mesh.hpp"
#include "cafem/sparse.hpp"

namespace cafem::fem {

using LocalMatrix = std::array<std::array<double, 3>, 3>;

/// Edge-midpoint rule on triangles (exact to degree 2). Points are barycentric;
/// weights are fractions of the triangle area.
struct TriangleRule {
  std::array<std::array<double, 3>, 3> points;
  std::array<double, 3> weights;
};
const TriangleRule& midpoint_rule();

/// Two-point Gauss rule on [0, 1] (exact to degree 3); weights sum to 1.
struct EdgeRule {
  std::array<double, 2> points;
  std::array<double, 2> weights;
};
const EdgeRule& gauss2_rule();

double signed_area(Point2 a, Point2 b, Point2 c);

/// Consistent P1 mass matrix of one triangle.
LocalMatrix element_mass(Point2 a, Point2 b, Point2 c);
/// P1 stiffness matrix of one triangle for unit diffusion.
LocalMatrix element_stiffness(Point2 a, Point2 b, Point2 c);

/// Quadrature point on a boundary edge handed to load evaluators.
struct EdgePoint {
  double x = 0.0, y = 0.0;
  std::size_t edge = 0;  // position among the marked edges, in boundary order
  std::array<int, 2> nodes{};
  double s = 0.0;                // parameter along the edge: node 0 at s = 0
  double nx = 0.0, ny = 0.0;     // unit normal, outward from the mesh
  double interpolate(std::span<const double> nodal) const {
    return (1.0 - s) * nodal[nodes[0]] + s * nodal[nodes[1]];
  }
};

/// Quadrature point inside a triangle handed to load evaluators.
struct TrianglePoint {
  double x = 0.0, y = 0.0;
  std::size_t triangle = 0;
  std::array<int, 3> nodes{};
  std::array<double, 3> bary{};
  double interpolate(std::span<const double> nodal) const {
    return bary[0] * nodal[nodes[0]] + bary[1] * nodal[nodes[1]] + bary[2] * nodal[nodes[2]];
  }
};

using EdgeEvaluator = std::function<double(const EdgePoint&)>;
using VolumeEvaluator = std::function<double(const TrianglePoint&)>;

/// Throws StructuralError naming the first triangle with non-positive area.
SparseMatrixSym assemble_mass(const Mesh2D& mesh);
SparseMatrixSym assemble_stiffness(const Mesh2D& mesh);
/// 1D consistent mass on the marked polygon. Throws InputError for an absent marker.
SparseMatrixSym assemble_boundary_mass(const Mesh2D& mesh, BoundaryMarker marker);

/// Precomputed quadrature points of the marked edges; weight = rule weight * edge length.
struct EdgeQuadrature {
  std::vector<EdgePoint> points;
  std::vector<double> weights;
};
/// Outward normals follow the counterclockwise-loop convention of Mesh2D: the
/// cytosol interface loop has the domain outside it, every other loop inside.
EdgeQuadrature edge_quadrature(const Mesh2D& mesh, BoundaryMarker marker);

/// Precomputed midpoint-rule points; weight = rule weight * triangle area.
struct VolumeQuadrature {
  std::vector<TrianglePoint> points;
  std::vector<double> weights;
};
VolumeQuadrature volume_quadrature(const Mesh2D& mesh);

/// Adds the integral of g * phi_i over each marked edge (2-point Gauss) into
/// load. Throws Error naming the edge if g is non-finite.
void add_boundary_load(const EdgeQuadrature& quad, const EdgeEvaluator& g, std::span<double> load);
std::vector<double> assemble_boundary_load(const Mesh2D& mesh, BoundaryMarker marker, const EdgeEvaluator& g);

/// Adds the integral of f * phi_i over each triangle (midpoint rule) into load.
void add_volume_load(const VolumeQuadrature& quad, const VolumeEvaluator& f, std::span<double> load);
std::vector<double> assemble_volume_load(const Mesh2D& mesh, const VolumeEvaluator& f);

/// Time-independent operators of one subdomain mesh.
struct AssembledOperators {
  SparseMatrixSym mass;
  SparseMatrixSym stiffness;
  SparseMatrixSym outer_mass;      // empty for the ER disk
  SparseMatrixSym interface_mass;
  double area = 0.0;
};
AssembledOperators assemble_operators(const Mesh2D& mesh);

/// Area of the triangulated region (sum of triangle areas).
double mesh_area(const Mesh2D& mesh);

}  // namespace cafem::fem
