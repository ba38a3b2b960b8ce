#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "cprobe/cli/config.hpp"

namespace cprobe::cli {

using Cell = std::variant<double, long long, bool, std::string>;

/// Rectangular result table. Column names carry their units.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

/// Scientific notation with 13 significant digits, '.' decimal separator.
std::string format_cell(const Cell& cell);

void write_csv(const Table& table, std::ostream& out);
/// Array of row objects keyed by column name; non-finite numbers become null.
void write_json(const Table& table, std::ostream& out);
void write_table(const Table& table, OutputFormat format, std::ostream& out);

}  // namespace cprobe::cli
