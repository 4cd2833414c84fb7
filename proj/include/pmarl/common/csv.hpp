#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pmarl::csv {

/// Shortest decimal text that round-trips to the same double ("nan" for NaN).
std::string format(double value);

/// Joins ints with ';' (used for id sets inside a single CSV field).
std::string join_ids(const std::vector<int>& ids);
std::vector<int> split_ids(std::string_view field);

std::vector<std::string> split_row(std::string_view line);

/// A parsed CSV file: '#' comment lines are collected separately, the first
/// non-comment line is the header.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<int> row_lines;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

/// Throws ConfigError naming the file and line on ragged rows.
Table read(const std::string& path);
Table parse(std::istream& in, const std::string& source_name);

/// Parses a numeric field; throws ConfigError("<source>:<line>: ...").
double to_double(const std::string& field, const std::string& source, int line);

}  // namespace pmarl::csv
