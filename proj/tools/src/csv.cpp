#include "rofanova_cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rofanova::cli {

ParseError::ParseError(std::size_t row, std::size_t column, const std::string& what)
    : IngestError("row " + std::to_string(row) +
                  (column > 0 ? ", column " + std::to_string(column) : std::string()) + ": " + what),
      row_(row),
      column_(column) {}

CsvLayout parse_layout(std::string_view name) {
  if (name == "wide") return CsvLayout::wide;
  if (name == "long") return CsvLayout::long_format;
  throw ConfigError("unknown CSV layout '" + std::string(name) + "' (expected wide or long)");
}

std::string_view to_string(CsvLayout layout) {
  return layout == CsvLayout::wide ? "wide" : "long";
}

std::string format_exact(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_result(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::vector<std::string> split_record(std::string_view line, char delimiter, std::size_t row) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          fields.back() += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError(row, fields.size(), "unterminated quoted field");
  for (std::string& f : fields) {
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
  }
  return fields;
}

namespace {

std::optional<double> try_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const char* end = text.data() + text.size();
  const char* begin = text.data() + (text.front() == '+' ? 1 : 0);
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

double parse_value(const std::string& text, std::size_t row, std::size_t column) {
  const auto v = try_number(text);
  if (!v) throw ParseError(row, column, "cannot parse '" + text + "' as a number");
  if (!std::isfinite(*v)) throw ParseError(row, column, "non-finite value '" + text + "'");
  return *v;
}

// Numeric when both names are numbers, lexicographic otherwise.
bool level_less(const std::string& a, const std::string& b) {
  const auto x = try_number(a);
  const auto y = try_number(b);
  if (x && y && *x != *y) return *x < *y;
  return a < b;
}

std::vector<std::string> sorted_levels(const std::vector<std::string>& names) {
  std::vector<std::string> levels = names;
  std::sort(levels.begin(), levels.end(), level_less);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

std::size_t index_of(const std::vector<std::string>& levels, const std::string& name) {
  return static_cast<std::size_t>(std::find(levels.begin(), levels.end(), name) - levels.begin());
}

// Rounds away quadrature noise so bounds written as short decimals come back
// as the same double.
double snap(double x, double step) {
  const int decimals = std::clamp(static_cast<int>(std::ceil(-std::log10(step))) + 6, 0, 15);
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

// Bounds of the grid whose midpoints are the sorted coordinates `c`.
Interval bounds_from_midpoints(const std::vector<double>& c, const std::string& what) {
  if (c.size() == 1) return {c[0] - 0.5, c[0] + 0.5};
  const double step = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
  if (!(step > 0.0)) throw IngestError(what + " coordinates must increase");
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c[k] - (c.front() + static_cast<double>(k) * step)) > 1e-6 * step) {
      throw IngestError(what + " coordinates are not evenly spaced");
    }
  }
  return {snap(c.front() - 0.5 * step, step), snap(c.back() + 0.5 * step, step)};
}

struct Columns {
  std::optional<std::size_t> unit, a, b;
};

Columns locate_labels(const std::vector<std::string>& header, const IngestSchema& schema) {
  Columns cols;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == schema.unit_column) cols.unit = k;
    if (header[k] == schema.factor_a_column) cols.a = k;
    if (header[k] == schema.factor_b_column) cols.b = k;
  }
  if (schema.require_labels && !cols.a) {
    throw IngestError("missing column '" + schema.factor_a_column + "'");
  }
  if (schema.require_labels && schema.design == DesignKind::two_way && !cols.b) {
    throw IngestError("missing column '" + schema.factor_b_column + "' required by a two-way design");
  }
  if (schema.design == DesignKind::one_way) cols.b.reset();
  return cols;
}

Dataset assemble(DomainGrid grid, std::vector<double> values, std::vector<std::string> ids,
                 const std::vector<std::string>& names_a, const std::vector<std::string>& names_b,
                 bool labeled) {
  Dataset d{FunctionalSample(grid, 0, {}), std::move(ids), {}, {}};
  const std::size_t n = d.unit_ids.size();
  if (n == 0) throw IngestError("no data rows");
  if (!labeled) {
    d.sample = FunctionalSample(std::move(grid), n, std::move(values));
    return d;
  }
  d.levels_a = sorted_levels(names_a);
  d.levels_b = names_b.empty() ? std::vector<std::string>{} : sorted_levels(names_b);
  std::vector<Label> labels(n);
  for (std::size_t u = 0; u < n; ++u) {
    labels[u].a = index_of(d.levels_a, names_a[u]);
    if (!names_b.empty()) labels[u].b = index_of(d.levels_b, names_b[u]);
  }
  d.sample = FunctionalSample(std::move(grid), n, std::move(values), std::move(labels),
                              d.levels_a.size(), std::max<std::size_t>(1, d.levels_b.size()));
  return d;
}

Dataset read_wide(std::istream& in, const IngestSchema& schema) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  if (schema.header) {
    while (header.empty() && std::getline(in, line)) {
      ++row;
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        header = split_record(line, schema.delimiter, row);
      }
    }
    if (header.empty()) throw IngestError("empty file");
  }

  Columns cols;
  std::vector<std::size_t> grid_cols;
  std::size_t width = 0;
  if (schema.header) {
    cols = locate_labels(header, schema);
    width = header.size();
  } else {
    // Headerless: factor A [, factor B], then values.
    std::size_t next = 0;
    if (schema.require_labels) {
      cols.a = next++;
      if (schema.design == DesignKind::two_way) cols.b = next++;
    }
  }

  std::vector<double> values;
  std::vector<std::string> ids, names_a, names_b;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_record(line, schema.delimiter, row);
    if (width == 0) width = fields.size();
    if (grid_cols.empty()) {
      for (std::size_t k = 0; k < width; ++k) {
        if (k != cols.unit && k != cols.a && k != cols.b &&
            !(schema.header && (header[k] == schema.factor_b_column ||
                                header[k] == schema.factor_a_column))) {
          grid_cols.push_back(k);
        }
      }
      if (grid_cols.empty()) throw IngestError("no grid value columns");
    }
    if (fields.size() != width) {
      throw ParseError(row, 0, "expected " + std::to_string(width) + " fields, found " +
                                   std::to_string(fields.size()));
    }
    for (std::size_t k : grid_cols) values.push_back(parse_value(fields[k], row, k + 1));
    ids.push_back(cols.unit ? fields[*cols.unit] : std::to_string(ids.size() + 1));
    if (cols.a) names_a.push_back(fields[*cols.a]);
    if (cols.b) names_b.push_back(fields[*cols.b]);
  }
  if (ids.empty()) throw IngestError("no data rows");

  Interval domain{};
  if (schema.domain) {
    domain = *schema.domain;
  } else if (schema.header) {
    std::vector<double> coords;
    for (std::size_t k : grid_cols) {
      const auto t = try_number(header[k]);
      if (!t) {
        coords.clear();
        break;
      }
      coords.push_back(*t);
    }
    if (!coords.empty()) domain = bounds_from_midpoints(coords, "grid column");
  }
  return assemble(DomainGrid::line(grid_cols.size(), domain), std::move(values), std::move(ids),
                  names_a, names_b, cols.a.has_value());
}

Dataset read_long(std::istream& in, const IngestSchema& schema) {
  if (!schema.header) throw IngestError("the long layout needs a header row");
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      header = split_record(line, schema.delimiter, row);
    }
  }
  if (header.empty()) throw IngestError("empty file");
  const Columns cols = locate_labels(header, schema);
  const auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  if (!cols.unit) throw IngestError("missing column '" + schema.unit_column + "'");
  const auto value_col = find(schema.value_column);
  if (!value_col) throw IngestError("missing column '" + schema.value_column + "'");
  std::vector<std::size_t> coord_cols;
  if (const auto x = find("x"), y = find("y"); x && y) {
    coord_cols = {*x, *y};
  } else if (const auto t = find("t")) {
    coord_cols = {*t};
  } else {
    throw IngestError("missing coordinate column 't' (or 'x' and 'y')");
  }

  struct Entry {
    std::size_t unit;
    std::vector<double> coord;
    double value;
    std::size_t row;
  };
  std::vector<Entry> entries;
  std::vector<std::string> ids, names_a, names_b;
  std::map<std::string, std::size_t> unit_index;
  std::vector<std::vector<double>> axis(coord_cols.size());
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_record(line, schema.delimiter, row);
    if (fields.size() != header.size()) {
      throw ParseError(row, 0, "expected " + std::to_string(header.size()) + " fields, found " +
                                   std::to_string(fields.size()));
    }
    const std::string& id = fields[*cols.unit];
    auto [it, fresh] = unit_index.emplace(id, ids.size());
    if (fresh) {
      ids.push_back(id);
      if (cols.a) names_a.push_back(fields[*cols.a]);
      if (cols.b) names_b.push_back(fields[*cols.b]);
    } else {
      if (cols.a && names_a[it->second] != fields[*cols.a]) {
        throw ParseError(row, *cols.a + 1, "unit '" + id + "' changes its factor A level");
      }
      if (cols.b && names_b[it->second] != fields[*cols.b]) {
        throw ParseError(row, *cols.b + 1, "unit '" + id + "' changes its factor B level");
      }
    }
    Entry e{it->second, {}, parse_value(fields[*value_col], row, *value_col + 1), row};
    for (std::size_t ax = 0; ax < coord_cols.size(); ++ax) {
      e.coord.push_back(parse_value(fields[coord_cols[ax]], row, coord_cols[ax] + 1));
      axis[ax].push_back(e.coord.back());
    }
    entries.push_back(std::move(e));
  }
  if (ids.empty()) throw IngestError("no data rows");

  std::vector<Interval> bounds;
  for (std::size_t ax = 0; ax < axis.size(); ++ax) {
    std::sort(axis[ax].begin(), axis[ax].end());
    axis[ax].erase(std::unique(axis[ax].begin(), axis[ax].end()), axis[ax].end());
    bounds.push_back(bounds_from_midpoints(axis[ax], header[coord_cols[ax]]));
  }
  const DomainGrid grid = axis.size() == 1
                              ? DomainGrid::line(axis[0].size(), bounds[0])
                              : DomainGrid::plane(axis[0].size(), axis[1].size(), bounds[0], bounds[1]);
  const std::size_t m = grid.size();
  std::vector<double> values(ids.size() * m, 0.0);
  std::vector<char> seen(ids.size() * m, 0);
  for (const Entry& e : entries) {
    std::size_t k = 0;
    for (std::size_t ax = 0; ax < axis.size(); ++ax) {
      const auto pos = std::lower_bound(axis[ax].begin(), axis[ax].end(), e.coord[ax]) - axis[ax].begin();
      k = k * axis[ax].size() + static_cast<std::size_t>(pos);
    }
    if (seen[e.unit * m + k]) {
      throw ParseError(e.row, 0, "unit '" + ids[e.unit] + "' repeats a grid point");
    }
    seen[e.unit * m + k] = 1;
    values[e.unit * m + k] = e.value;
  }
  for (std::size_t u = 0; u < ids.size(); ++u) {
    const auto covered = std::count(seen.begin() + static_cast<std::ptrdiff_t>(u * m),
                                    seen.begin() + static_cast<std::ptrdiff_t>((u + 1) * m), 1);
    if (static_cast<std::size_t>(covered) != m) {
      throw IngestError("unit '" + ids[u] + "' covers " + std::to_string(covered) + " of " +
                        std::to_string(m) + " grid points");
    }
  }
  return assemble(grid, std::move(values), std::move(ids), names_a, names_b, cols.a.has_value());
}

}  // namespace

Dataset read_dataset(std::istream& in, const IngestSchema& schema) {
  return schema.layout == CsvLayout::wide ? read_wide(in, schema) : read_long(in, schema);
}

Dataset read_dataset_file(const std::string& path, const IngestSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return read_dataset(in, schema);
}

void write_wide(std::ostream& out, const Dataset& data, char delimiter) {
  const FunctionalSample& s = data.sample;
  if (s.grid().dim() != 1) throw IngestError("the wide layout holds 1D grids only");
  const bool labeled = s.has_labels();
  const bool two_way = labeled && !data.levels_b.empty();
  out << "unit_id";
  if (labeled) out << delimiter << "factorA";
  if (two_way) out << delimiter << "factorB";
  for (double t : s.grid().coordinates(0)) out << delimiter << format_result(t);
  out << '\n';
  for (std::size_t u = 0; u < s.size(); ++u) {
    out << (u < data.unit_ids.size() ? data.unit_ids[u] : std::to_string(u + 1));
    if (labeled) out << delimiter << data.levels_a.at(s.label(u).a);
    if (two_way) out << delimiter << data.levels_b.at(s.label(u).b);
    for (double v : s.row(u)) out << delimiter << format_exact(v);
    out << '\n';
  }
}

void write_wide_file(const std::string& path, const Dataset& data, char delimiter) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write '" + path + "'");
  write_wide(out, data, delimiter);
}

}  // namespace rofanova::cli
