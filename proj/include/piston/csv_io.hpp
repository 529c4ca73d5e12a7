#ifndef PISTON_CSV_IO_HPP_
#define PISTON_CSV_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "piston/solver.hpp"
#include "piston/state.hpp"

namespace piston {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double x);

/// Header row, then one row per sample, then "# status=<status>".
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record);
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record);

/// Columns t,i,m,theta,x,rho,v with one row per node (i integer, v set) and
/// one per cell center (i half-integer, rho set). Unused fields are empty.
void write_profile_csv(std::ostream& os, const SystemState& state);
void write_profile_csv(const std::filesystem::path& path, const SystemState& state);

/// Numeric table read back from CSV. Empty fields become NaN, '#' lines
/// are comments.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column, or nullopt.
  std::optional<std::size_t> column(const std::string& name) const;
  std::vector<double> values(std::size_t column) const;
};

/// Throws ConfigError (context "<file>:<line>") on malformed rows.
CsvTable read_csv(std::istream& is, const std::string& source = "<stream>");
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace piston

#endif  // PISTON_CSV_IO_HPP_
