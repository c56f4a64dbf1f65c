#include "cafem/output.hpp"

#include <cmath>
#include <cstdio>
#include <locale>
#include <ostream>

#include "cafem/errors.hpp"

namespace cafem {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_grid(const Mesh2D& mesh, const char* title, std::ostream& out) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices) out << g17(v.x) << ' ' << g17(v.y) << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t i = 0; i < mesh.num_triangles(); ++i) out << "5\n";
  out << "POINT_DATA " << mesh.num_vertices() << '\n';
}

void write_scalars(const char* name, std::span<const double> values, std::ostream& out) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) out << g17(v) << '\n';
}

void check_stream(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void write_vtk_cytosol(const FieldState& state, const Discretization& disc, std::ostream& out) {
  const Geometry& g = *disc.geometry;
  if (state.u.size() != g.cytosol.num_vertices()) throw InputError("cytosol field size does not match the mesh");
  write_grid(g.cytosol, "cytosol calcium", out);
  write_scalars("u", state.u, out);
  if (!state.b.empty()) write_scalars("b", state.b, out);
  std::vector<double> p(g.cytosol.num_vertices(), -1.0);
  const std::vector<double> open = open_probability(state.gating);
  for (std::size_t k = 0; k < g.interface.size(); ++k) p[g.interface.cytosol_nodes[k]] = open[k];
  write_scalars("P", p, out);
}

void write_vtk_er(const FieldState& state, const Discretization& disc, std::ostream& out) {
  const Geometry& g = *disc.geometry;
  if (state.ue.size() != g.er.num_vertices()) throw InputError("ER field size does not match the mesh");
  write_grid(g.er, "ER calcium", out);
  write_scalars("ue", state.ue, out);
}

std::vector<std::filesystem::path> write_snapshot_vtk(const FieldState& state, const Discretization& disc,
                                                      const std::filesystem::path& stem) {
  const std::filesystem::path cyto = stem.string() + "_cytosol.vtk", er = stem.string() + "_er.vtk";
  {
    std::ofstream out(cyto);
    write_vtk_cytosol(state, disc, out);
    check_stream(out, cyto);
  }
  {
    std::ofstream out(er);
    write_vtk_er(state, disc, out);
    check_stream(out, er);
  }
  return {cyto, er};
}

const char* timeseries_header() {
  return "t,u_min,u_max,u_mean,b_min,b_max,b_mean,ue_min,ue_max,ue_mean,p_min,p_max,iterations";
}

std::string timeseries_record(const TimeSeriesRow& r) {
  std::string s;
  for (double v : {r.t, r.u_min, r.u_max, r.u_mean, r.b_min, r.b_max, r.b_mean, r.ue_min, r.ue_max, r.ue_mean, r.p_min,
                   r.p_max}) {
    s += g17(v);
    s += ',';
  }
  s += std::to_string(r.iterations);
  return s;
}

void write_timeseries_csv(std::span<const TimeSeriesRow> rows, std::ostream& out) {
  if (rows.empty()) throw InputError("time series is empty");
  out << timeseries_header() << '\n';
  for (const auto& r : rows) out << timeseries_record(r) << '\n';
}

void write_timeseries_csv(std::span<const TimeSeriesRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  write_timeseries_csv(rows, out);
  check_stream(out, path);
}

TimeSeriesWriter::TimeSeriesWriter(const std::filesystem::path& path) : path_(path), out_(path) {
  out_.imbue(std::locale::classic());
  out_ << timeseries_header() << '\n';
  check_stream(out_, path_);
}

void TimeSeriesWriter::append(const TimeSeriesRow& row) {
  if (rows_ > 0 && !(row.t > last_t_)) throw InputError("time series rows must have increasing t");
  out_ << timeseries_record(row) << '\n';
  check_stream(out_, path_);
  last_t_ = row.t;
  ++rows_;
}

}  // namespace cafem
