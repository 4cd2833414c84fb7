#include "pmarl/common/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pmarl/common/error.hpp"

namespace pmarl::csv {

std::string format(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string join_ids(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(ids[k]);
  }
  return out;
}

std::vector<int> split_ids(std::string_view field) {
  std::vector<int> ids;
  std::size_t start = 0;
  while (start < field.size()) {
    auto end = field.find(';', start);
    if (end == std::string_view::npos) end = field.size();
    int v = 0;
    auto res = std::from_chars(field.data() + start, field.data() + end, v);
    if (res.ec != std::errc() || res.ptr != field.data() + end) {
      throw InputError("bad id list '" + std::string(field) + "'");
    }
    ids.push_back(v);
    start = end + 1;
  }
  return ids;
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto end = line.find(',', start);
    if (end == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      break;
    }
    cells.emplace_back(line.substr(start, end - start));
    start = end + 1;
  }
  return cells;
}

int Table::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return static_cast<int>(k);
  }
  return -1;
}

Table parse(std::istream& in, const std::string& source_name) {
  Table table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    auto cells = split_row(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " fields, found " +
                        std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.row_lines.push_back(line_no);
  }
  if (table.header.empty()) throw ConfigError(source_name + ": missing CSV header");
  return table;
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse(in, path);
}

double to_double(const std::string& field, const std::string& source, int line) {
  if (field == "nan") return std::nan("");
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ConfigError(source + ":" + std::to_string(line) + ": not a number '" + field + "'");
  }
  return v;
}

}  // namespace pmarl::csv
