#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace plotsmith {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

/// Comma-separated output with a fixed header; every line newline-terminated.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return text_; }

private:
  std::size_t width_;
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines; // source line of each row

  /// Column index by name, or -1.
  int column(std::string_view name) const;
};

/// Parses simple CSV (no quoting). Blank lines are skipped. Throws
/// Error("csv_error") on ragged rows.
CsvTable parse_csv(std::string_view text);

} // namespace plotsmith
