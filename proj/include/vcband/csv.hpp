#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vcband::csv {

// Shortest round-trippable decimal form (17 significant digits).
std::string format_double(double v);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // excluding the header

  // 1-based file line of data row r (header is line 1).
  int line_of(std::size_t r) const { return static_cast<int>(r) + 2; }
  int column(const std::string& name) const;  // -1 when absent
};

// Reads a comma-separated file with a header row. Throws std::runtime_error
// naming the file for I/O failures; ragged rows are reported with their line
// number.
Table read_table(const std::string& path);

// Parses a floating-point field; throws std::runtime_error with the given
// context (file/line/column description) on failure.
double parse_double(const std::string& field, const std::string& context);

}  // namespace vcband::csv
