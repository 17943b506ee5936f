#include "groupinf/csv.hpp"

#include "groupinf/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

namespace groupinf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string location(int line, int column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

bool is_missing(std::string_view field) {
  const std::string f = lower(trim(field));
  return f.empty() || f == "na" || f == "nan" || f == "n/a" || f == ".";
}

bool parse_number(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

CsvTable parse_csv(std::istream& in, char delimiter) {
  CsvTable table;
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);

  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  int line = 1;
  int record_line = 1;
  int column = 1;

  auto end_field = [&] {
    record.push_back(quoted_field ? field : std::string(trim(field)));
    field.clear();
    quoted_field = false;
    ++column;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw ParseError(location(record_line, static_cast<int>(record.size())) + ": expected " +
                           std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(record.size()));
        }
        table.rows.push_back(std::move(record));
        table.row_lines.push_back(record_line);
      }
    }
    record.clear();
    column = 1;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (!trim(field).empty()) {
        throw ParseError(location(line, column) + ": quote inside an unquoted field");
      }
      field.clear();
      in_quotes = true;
      quoted_field = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
      record_line = line;
    } else {
      if (quoted_field && !std::isspace(static_cast<unsigned char>(ch))) {
        throw ParseError(location(line, column) + ": text after a closing quote");
      }
      if (!quoted_field) field.push_back(ch);
    }
  }
  if (in_quotes) throw ParseError(location(record_line, column) + ": unterminated quoted field");
  if (!field.empty() || quoted_field || !record.empty()) end_record();
  if (table.header.empty()) throw ParseError("input has no header row");
  return table;
}

CsvTable read_csv_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return parse_csv(in, delimiter);
}

}  // namespace groupinf
