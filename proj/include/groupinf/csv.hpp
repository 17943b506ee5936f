#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace groupinf {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;  // 1-based source line of each row
};

/// Delimited text with a header row. Fields may be double-quoted, with ""
/// as an escaped quote. Throws ParseError with the line and column of the
/// first malformed record.
CsvTable parse_csv(std::istream& in, char delimiter = ',');
CsvTable read_csv_file(const std::string& path, char delimiter = ',');

/// Empty, NA, NaN, N/A or "." (case-insensitive, surrounding blanks ignored).
bool is_missing(std::string_view field);

/// Strict decimal parse of the whole field (surrounding blanks allowed).
bool parse_number(std::string_view field, double& out);

}  // namespace groupinf
