#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "burgers/errors.hpp"
#include "burgers/grid.hpp"

namespace burgers {

/// Shortest decimal that round-trips to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    row_strings(header);
  }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw ConfigError("csv row has wrong column count");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << fmt_double(values[i]);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    f << out_.str();
  }

private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::size_t columns_;
  std::ostringstream out_;
};

/// `x,value` rows for one field.
inline std::string field_csv(const Field& f) {
  CsvWriter w({"x", "value"});
  for (std::size_t i = 0; i < f.size(); ++i) w.row({f.grid().x(i), f[i]});
  return w.str();
}

/// `t,x,value` rows for a trajectory, optionally keeping every `stride`-th frame.
inline std::string trajectory_csv(const SpaceTimeField& F, std::size_t stride = 1) {
  CsvWriter w({"t", "x", "value"});
  if (stride == 0) stride = 1;
  for (std::size_t k = 0; k < F.frames(); ++k) {
    if (k % stride != 0 && k + 1 != F.frames()) continue;
    const double t = F.tgrid().t(k);
    for (std::size_t i = 0; i < F.grid().n; ++i) w.row({t, F.grid().x(i), F(k, i)});
  }
  return w.str();
}

/// Reads a two-column `x,value` file. A non-numeric first line is taken as a header.
inline std::vector<std::pair<double, double>> read_xy_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open profile file " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("profile line without comma: " + line);
    try {
      std::size_t used = 0;
      const double x = std::stod(line.substr(0, comma), &used);
      const double v = std::stod(line.substr(comma + 1));
      rows.emplace_back(x, v);
    } catch (const std::logic_error&) {
      if (!first) throw ConfigError("unparsable profile line: " + line);
    }
    first = false;
  }
  if (rows.size() < 2) throw ConfigError("profile file needs at least two samples");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].first > rows[i - 1].first)) throw ConfigError("profile abscissae must increase");
  return rows;
}

} // namespace burgers
