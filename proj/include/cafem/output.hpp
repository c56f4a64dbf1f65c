#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cafem/stepper.hpp"

namespace cafem {

/// Legacy ASCII VTK unstructured grid of one subdomain. Point data: for the
/// cytosol, "u", "b" (when present) and "P" (open probability on interface
/// nodes, -1 elsewhere); for the ER, "ue". Values use 17 significant digits.
void write_vtk_cytosol(const FieldState& state, const Discretization& disc, std::ostream& out);
void write_vtk_er(const FieldState& state, const Discretization& disc, std::ostream& out);

/// Writes <stem>_cytosol.vtk and <stem>_er.vtk; returns both paths.
std::vector<std::filesystem::path> write_snapshot_vtk(const FieldState& state, const Discretization& disc,
                                                      const std::filesystem::path& stem);

/// Header of the time-series CSV.
const char* timeseries_header();
/// One CSV record, 17 significant digits, '.' decimal regardless of locale.
std::string timeseries_record(const TimeSeriesRow& row);

/// Header plus one line per row.
void write_timeseries_csv(std::span<const TimeSeriesRow> rows, std::ostream& out);
void write_timeseries_csv(std::span<const TimeSeriesRow> rows, const std::filesystem::path& path);

/// Incremental writer for long runs: the header on construction, one line per
/// append. Rejects rows whose time does not increase.
class TimeSeriesWriter {
 public:
  explicit TimeSeriesWriter(const std::filesystem::path& path);
  void append(const TimeSeriesRow& row);
  long rows() const { return rows_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  long rows_ = 0;
  double last_t_ = 0.0;
};

}  // namespace cafem
