#include "plotsmith/csv.hpp"

#include <charconv>
#include <cmath>

#include "plotsmith/error.hpp"

namespace plotsmith {

std::string format_number(double x) {
  if (x == 0.0) return "0"; // folds -0
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error("csv_error", "row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    const auto& cell = cells[i];
    if (cell.find_first_of(",\"\n") == std::string::npos) {
      text_ += cell;
      continue;
    }
    text_ += '"';
    for (char c : cell) {
      if (c == '"') text_ += '"';
      text_ += c;
    }
    text_ += '"';
  }
  text_ += '\n';
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

} // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) {
        throw Error("csv_error", "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(table.header.size()) + " cells, found " +
                                     std::to_string(cells.size()));
      }
      table.rows.push_back(std::move(cells));
      table.lines.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (table.header.empty()) throw Error("csv_error", "missing header row");
  return table;
}

} // namespace plotsmith
