#pragma once

// CSV ingestion and export of functional samples.
//
// Wide layout: one row per unit, optional leading label columns (unit id,
// factor A, factor B) and one column per grid point. Numeric headers are read
// as grid coordinates (midpoints of equal subintervals); 1D grids only.
//
// Long layout: one row per (unit, grid point) with columns unit id, factor A,
// optional factor B, the coordinate column `t` (or `x` and `y` for 2D grids)
// and `value`. Every unit must cover the grid exactly once.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rofanova/error.hpp"
#include "rofanova/fanova.hpp"
#include "rofanova/grid.hpp"

namespace rofanova::cli {

class IngestError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV text; row and column are 1-based positions in the file.
class ParseError : public IngestError {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what);

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

enum class CsvLayout { wide, long_format };

CsvLayout parse_layout(std::string_view name);
std::string_view to_string(CsvLayout layout);

struct IngestSchema {
  CsvLayout layout = CsvLayout::wide;
  char delimiter = ',';
  bool header = true;
  DesignKind design = DesignKind::one_way;
  bool require_labels = true;
  std::string unit_column = "unit_id";
  std::string factor_a_column = "factorA";
  std::string factor_b_column = "factorB";
  std::string value_column = "value";
  /// Domain of a wide file; inferred from numeric headers when absent.
  std::optional<Interval> domain;
};

struct Dataset {
  FunctionalSample sample;
  std::vector<std::string> unit_ids;
  std::vector<std::string> levels_a;  // name of level index i
  std::vector<std::string> levels_b;
};

/// Splits one CSV record. Double quotes group fields; "" inside quotes is a quote.
std::vector<std::string> split_record(std::string_view line, char delimiter, std::size_t row);

Dataset read_dataset(std::istream& in, const IngestSchema& schema);
Dataset read_dataset_file(const std::string& path, const IngestSchema& schema);

/// Wide layout with shortest round-trip numbers, so reading it back yields
/// an identical sample.
void write_wide(std::ostream& out, const Dataset& data, char delimiter = ',');
void write_wide_file(const std::string& path, const Dataset& data, char delimiter = ',');

/// Shortest decimal text that parses back to the same double.
std::string format_exact(double value);
/// 12 significant digits, for result tables.
std::string format_result(double value);

}  // namespace rofanova::cli
