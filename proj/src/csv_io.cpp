#include "piston/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "piston/errors.hpp"

namespace piston {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError(path.string(), "cannot open for writing");
  return os;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record) {
  os << "t,a,b,adot,bdot,u,U,E,W,V,dV_dt,xi,x_norm,momentum,min_rho,max_rho\n";
  for (const auto& s : record.samples) {
    const double row[] = {s.t, s.a,  s.b,     s.adot, s.bdot,   s.u,      s.U,       s.E,
                          s.W, s.V, s.dV_dt, s.xi,   s.x_norm, s.momentum, s.min_rho, s.max_rho};
    bool first = true;
    for (double x : row) {
      if (!first) os << ',';
      os << format_double(x);
      first = false;
    }
    os << '\n';
  }
  os << "# status=" << record.status_text() << '\n';
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record) {
  auto os = open_output(path);
  write_trajectory_csv(os, record);
}

void write_profile_csv(std::ostream& os, const SystemState& state) {
  const std::size_t n = state.cells();
  const double dm = state.mass_step();
  const auto x = positions(state);
  const double len = x.back() - x.front();
  const std::string t = format_double(state.t);
  os << "t,i,m,theta,x,rho,v\n";
  for (std::size_t i = 0; i <= n; ++i) {
    const double m = static_cast<double>(i) * dm;
    os << t << ',' << i << ',' << format_double(m) << ',' << format_double((x[i] - state.a) / len)
       << ',' << format_double(x[i]) << ",," << format_double(state.v[i]) << '\n';
    if (i == n) break;
    const double xc = 0.5 * (x[i] + x[i + 1]);
    os << t << ',' << i << ".5," << format_double((static_cast<double>(i) + 0.5) * dm) << ','
       << format_double((xc - state.a) / len) << ',' << format_double(xc) << ','
       << format_double(state.rho[i]) << ",\n";
  }
}

void write_profile_csv(const std::filesystem::path& path, const SystemState& state) {
  auto os = open_output(path);
  write_profile_csv(os, state);
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<double> CsvTable::values(std::size_t col) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(col < r.size() ? r[col] : std::nan(""));
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

CsvTable read_csv(std::istream& is, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line);
    if (table.header.empty()) {
      for (auto& f : fields) table.header.push_back(trim(f));
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ConfigError(source + ":" + std::to_string(lineno),
                        "expected " + std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto& f : fields) {
      f = trim(f);
      if (f.empty()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw ConfigError(source + ":" + std::to_string(lineno), "not a number: '" + f + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ConfigError(source, "missing header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string(), "cannot open for reading");
  return read_csv(is, path.string());
}

}  // namespace piston
