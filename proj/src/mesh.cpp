#include "cafem/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "cafem/errors.hpp"

namespace cafem {

namespace {

// Ratios such as 2*pi*r/h land a few ulps above an integer for the
// pi/2^k family; without the slack ceil() would add a spurious arc.
constexpr double kCeilSlack = 1e-9;

int ceil_count(double ratio) { return static_cast<int>(std::ceil(ratio - kCeilSlack)); }

std::vector<Point2> make_ring(double r, int n) {
  std::vector<Point2> ring(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / n;
    ring[static_cast<std::size_t>(j)] = {r * std::cos(theta), r * std::sin(theta)};
  }
  return ring;
}

double dist2(Point2 a, Point2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Triangulate the band between an inner ring and an outer ring whose first
// vertices both sit at angle 0. Advances along whichever ring has the smaller
// next angle; exact ties take the shorter diagonal.
void stitch_rings(const std::vector<Point2>& pts, int inner_first, int n_inner, int outer_first,
                  int n_outer, std::vector<std::array<int, 3>>& tris) {
  int i = 0, j = 0;
  auto a = [&](int k) { return inner_first + (k % n_inner); };
  auto b = [&](int k) { return outer_first + (k % n_outer); };
  while (i < n_inner || j < n_outer) {
    bool advance_inner;
    if (i == n_inner) {
      advance_inner = false;
    } else if (j == n_outer) {
      advance_inner = true;
    } else {
      // compare (i+1)/n_inner with (j+1)/n_outer exactly
      const long lhs = static_cast<long>(i + 1) * n_outer;
      const long rhs = static_cast<long>(j + 1) * n_inner;
      if (lhs != rhs) {
        advance_inner = lhs < rhs;
      } else {
        advance_inner = dist2(pts[a(i + 1)], pts[b(j)]) <= dist2(pts[a(i)], pts[b(j + 1)]);
      }
    }
    if (advance_inner) {
      tris.push_back({a(i), b(j), a(i + 1)});
      ++i;
    } else {
      tris.push_back({a(i), b(j), b(j + 1)});
      ++j;
    }
  }
}

std::vector<double> layer_radii(double r0, double r1, int layers) {
  std::vector<double> radii(static_cast<std::size_t>(layers) + 1);
  for (int k = 0; k <= layers; ++k) radii[static_cast<std::size_t>(k)] = r0 + (r1 - r0) * k / layers;
  radii.back() = r1;
  return radii;
}

void append_loop_edges(int first, int n, BoundaryMarker marker, std::vector<BoundaryEdge>& out) {
  for (int j = 0; j < n; ++j) out.push_back({{first + j, first + (j + 1) % n}, marker});
}

double signed_area(Point2 a, Point2 b, Point2 c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

bool is_single_cycle(const std::vector<BoundaryEdge>& edges, BoundaryMarker marker) {
  std::map<int, int> next;
  std::map<int, int> indeg;
  std::size_t count = 0;
  for (const auto& e : edges) {
    if (e.marker != marker) continue;
    if (next.contains(e.v[0])) return false;
    next[e.v[0]] = e.v[1];
    ++indeg[e.v[1]];
    ++count;
  }
  if (count < 3) return false;
  for (const auto& [v, d] : indeg)
    if (d != 1 || !next.contains(v)) return false;
  int start = next.begin()->first, cur = start;
  std::size_t steps = 0;
  do {
    cur = next.at(cur);
    ++steps;
  } while (cur != start && steps <= count);
  return cur == start && steps == count;
}

}  // namespace

std::string to_string(DomainTag tag) { return tag == DomainTag::Cytosol ? "cytosol" : "er"; }

std::string to_string(BoundaryMarker marker) {
  return marker == BoundaryMarker::Outer ? "outer" : "interface";
}

std::vector<int> Mesh2D::boundary_loop(BoundaryMarker marker) const {
  std::vector<int> loop;
  for (const auto& e : boundary)
    if (e.marker == marker) loop.push_back(e.v[0]);
  return loop;
}

int ring_node_count(double r, double h) { return std::max(3, ceil_count(2.0 * std::numbers::pi * r / h)); }

// Rounded up to a power of two so that halving h bisects every layer: the
// h, h/2, h/4 ... family is then nested radially, as it is along the rings.
int layer_count(double length, double h) {
  const int minimal = ceil_count(length / h);
  int layers = 1;
  while (layers < minimal) layers *= 2;
  return layers;
}

std::size_t expected_triangle_count(double r_inner, double r_outer, double h, DomainTag domain) {
  std::size_t count = 0;
  if (domain == DomainTag::ER) {
    const int layers = layer_count(r_inner, h);
    const auto radii = layer_radii(0.0, r_inner, layers);
    count += static_cast<std::size_t>(ring_node_count(radii[1], h));
    for (int k = 1; k < layers; ++k)
      count += static_cast<std::size_t>(ring_node_count(radii[k], h) + ring_node_count(radii[k + 1], h));
  } else {
    const int layers = layer_count(r_outer - r_inner, h);
    const auto radii = layer_radii(r_inner, r_outer, layers);
    for (int k = 0; k < layers; ++k)
      count += static_cast<std::size_t>(ring_node_count(radii[k], h) + ring_node_count(radii[k + 1], h));
  }
  return count;
}

Geometry generate_geometry(double r_inner, double r_outer, double h) {
  if (!(r_inner > 0.0) || !(r_outer > 0.0) || !(h > 0.0))
    throw InputError("generate_geometry: radii and mesh size must be positive");
  if (!(r_inner < r_outer)) throw InputError("generate_geometry: r_inner must be smaller than r_outer");
  if (!(h < r_inner)) throw InputError("generate_geometry: mesh size must be smaller than r_inner");

  Geometry g;
  g.r_inner = r_inner;
  g.r_outer = r_outer;
  g.h = h;

  const int n_iface = ring_node_count(r_inner, h);
  const auto iface_ring = make_ring(r_inner, n_iface);

  // ER disk: center node, then rings outward; the last ring is the interface.
  {
    Mesh2D& m = g.er;
    m.domain = DomainTag::ER;
    const int layers = layer_count(r_inner, h);
    const auto radii = layer_radii(0.0, r_inner, layers);
    m.vertices.push_back({0.0, 0.0});
    std::vector<int> first(static_cast<std::size_t>(layers) + 1, 0), count(first.size(), 1);
    for (int k = 1; k <= layers; ++k) {
      const auto ring = k == layers ? iface_ring : make_ring(radii[k], ring_node_count(radii[k], h));
      first[k] = static_cast<int>(m.vertices.size());
      count[k] = static_cast<int>(ring.size());
      m.vertices.insert(m.vertices.end(), ring.begin(), ring.end());
    }
    for (int j = 0; j < count[1]; ++j) m.triangles.push_back({0, first[1] + j, first[1] + (j + 1) % count[1]});
    for (int k = 1; k < layers; ++k) stitch_rings(m.vertices, first[k], count[k], first[k + 1], count[k + 1], m.triangles);
    append_loop_edges(first[layers], n_iface, BoundaryMarker::Interface, m.boundary);
    for (int j = 0; j < n_iface; ++j) g.interface.er_nodes.push_back(first[layers] + j);
  }

  // Cytosol annulus: interface ring first, outer circle last.
  {
    Mesh2D& m = g.cytosol;
    m.domain = DomainTag::Cytosol;
    const int layers = layer_count(r_outer - r_inner, h);
    const auto radii = layer_radii(r_inner, r_outer, layers);
    std::vector<int> first(static_cast<std::size_t>(layers) + 1, 0), count(first.size(), 0);
    for (int k = 0; k <= layers; ++k) {
      const auto ring = k == 0 ? iface_ring : make_ring(radii[k], ring_node_count(radii[k], h));
      first[k] = static_cast<int>(m.vertices.size());
      count[k] = static_cast<int>(ring.size());
      m.vertices.insert(m.vertices.end(), ring.begin(), ring.end());
    }
    for (int k = 0; k < layers; ++k) stitch_rings(m.vertices, first[k], count[k], first[k + 1], count[k + 1], m.triangles);
    append_loop_edges(first[0], n_iface, BoundaryMarker::Interface, m.boundary);
    append_loop_edges(first[layers], count[layers], BoundaryMarker::Outer, m.boundary);
    for (int j = 0; j < n_iface; ++j) g.interface.cytosol_nodes.push_back(first[0] + j);
  }
  return g;
}

bool MeshDiagnostics::ok(DomainTag domain) const {
  const bool base = orientation_violations == 0 && index_violations == 0 &&
                    dangling_boundary_edges == 0 && unmarked_free_edges == 0 && interface_closed;
  return domain == DomainTag::Cytosol ? base && outer_closed : base;
}

MeshDiagnostics validate_mesh(const Mesh2D& mesh) {
  MeshDiagnostics d;
  d.min_area = std::numeric_limits<double>::infinity();
  d.max_area = -std::numeric_limits<double>::infinity();
  d.min_angle_deg = 180.0;
  const int nv = static_cast<int>(mesh.vertices.size());
  auto in_range = [nv](int i) { return i >= 0 && i < nv; };

  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& t : mesh.triangles) {
    if (!in_range(t[0]) || !in_range(t[1]) || !in_range(t[2])) {
      ++d.index_violations;
      continue;
    }
    const Point2 p[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    d.min_area = std::min(d.min_area, area);
    d.max_area = std::max(d.max_area, area);
    if (!(area > 0.0)) ++d.orientation_violations;
    for (int k = 0; k < 3; ++k) {
      const Point2 a = p[k], b = p[(k + 1) % 3], c = p[(k + 2) % 3];
      const double ab = std::sqrt(dist2(a, b));
      d.max_edge = std::max(d.max_edge, ab);
      const double ux = b.x - a.x, uy = b.y - a.y, vx = c.x - a.x, vy = c.y - a.y;
      const double angle = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
      d.min_angle_deg = std::min(d.min_angle_deg, angle * 180.0 / std::numbers::pi);
      const int i = t[k], j = t[(k + 1) % 3];
      ++edge_use[{std::min(i, j), std::max(i, j)}];
    }
  }
  if (mesh.triangles.empty()) d.min_area = d.max_area = d.min_angle_deg = 0.0;

  std::map<std::pair<int, int>, int> marked;
  for (const auto& e : mesh.boundary) {
    if (!in_range(e.v[0]) || !in_range(e.v[1])) {
      ++d.index_violations;
      continue;
    }
    const auto key = std::make_pair(std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1]));
    ++marked[key];
    auto it = edge_use.find(key);
    if (it == edge_use.end() || it->second != 1) ++d.dangling_boundary_edges;
  }
  for (const auto& [key, uses] : edge_use)
    if (uses == 1 && !marked.contains(key)) ++d.unmarked_free_edges;

  d.interface_closed = is_single_cycle(mesh.boundary, BoundaryMarker::Interface);
  d.outer_closed = is_single_cycle(mesh.boundary, BoundaryMarker::Outer);
  return d;
}

// ---------------------------------------------------------------------------
// ASCII format

void write_mesh(const Mesh2D& mesh, std::ostream& out) {
  out << "calmesh v1 " << to_string(mesh.domain) << '\n';
  out << "vertices " << mesh.vertices.size() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices) out << p.x << ' ' << p.y << '\n';
  out << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "boundary " << mesh.boundary.size() << '\n';
  for (const auto& e : mesh.boundary) out << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.marker) << '\n';
}

void write_mesh(const Mesh2D& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_mesh(mesh, out);
  if (!out) throw Error("write failed: " + path.string());
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line split into tokens; throws at end of input.
  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(line_ + 1, std::string("unexpected end of file, expected ") + expecting);
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

template <typename T>
T parse_number(const std::string& token, std::size_t line) {
  T value{};
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(line, "invalid number '" + token + "'");
  return value;
}

std::size_t parse_section(LineReader& reader, const char* name) {
  const auto tokens = reader.next(name);
  if (tokens.size() != 2 || tokens[0] != name)
    throw ParseError(reader.line(), std::string("expected '") + name + " <count>'");
  const auto n = parse_number<long long>(tokens[1], reader.line());
  if (n < 0) throw ParseError(reader.line(), "negative count");
  return static_cast<std::size_t>(n);
}

void expect_arity(const std::vector<std::string>& tokens, std::size_t n, std::size_t line) {
  if (tokens.size() != n)
    throw ParseError(line, "expected " + std::to_string(n) + " fields, got " + std::to_string(tokens.size()));
}

}  // namespace

Mesh2D read_mesh(std::istream& in) {
  LineReader reader(in);
  Mesh2D mesh;
  {
    const auto header = reader.next("header");
    if (header.size() != 3 || header[0] != "calmesh" || header[1] != "v1")
      throw ParseError(reader.line(), "expected header 'calmesh v1 <cytosol|er>'");
    if (header[2] == "cytosol")
      mesh.domain = DomainTag::Cytosol;
    else if (header[2] == "er")
      mesh.domain = DomainTag::ER;
    else
      throw ParseError(reader.line(), "unknown domain tag '" + header[2] + "'");
  }

  const std::size_t nv = parse_section(reader, "vertices");
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto tok = reader.next("vertex");
    expect_arity(tok, 2, reader.line());
    mesh.vertices.push_back({parse_number<double>(tok[0], reader.line()), parse_number<double>(tok[1], reader.line())});
  }

  auto vertex_index = [&](const std::string& token) {
    const auto idx = parse_number<long long>(token, reader.line());
    if (idx < 0 || idx >= static_cast<long long>(nv))
      throw StructuralError("line " + std::to_string(reader.line()) + ": vertex index " + token +
                            " out of range [0, " + std::to_string(nv) + ")");
    return static_cast<int>(idx);
  };

  const std::size_t nt = parse_section(reader, "triangles");
  mesh.triangles.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const auto tok = reader.next("triangle");
    expect_arity(tok, 3, reader.line());
    mesh.triangles.push_back({vertex_index(tok[0]), vertex_index(tok[1]), vertex_index(tok[2])});
  }

  const std::size_t nb = parse_section(reader, "boundary");
  mesh.boundary.reserve(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const auto tok = reader.next("boundary edge");
    expect_arity(tok, 3, reader.line());
    BoundaryEdge e{{vertex_index(tok[0]), vertex_index(tok[1])}, BoundaryMarker::Outer};
    if (tok[2] == "interface")
      e.marker = BoundaryMarker::Interface;
    else if (tok[2] != "outer")
      throw ParseError(reader.line(), "unknown boundary marker '" + tok[2] + "'");
    mesh.boundary.push_back(e);
  }
  return mesh;
}

Mesh2D read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_mesh(in);
}

}  // namespace cafem
