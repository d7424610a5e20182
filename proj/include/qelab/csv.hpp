#pragma once

#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qelab {

/// Shortest-safe form with 17 significant digits and '.' as decimal separator.
std::string format_double(double value);

/// RFC-4180 writer: comma separated, CRLF-free ('\n' line ends), fields quoted
/// only when they contain a comma, quote or newline.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::vector<std::string> cells;
    cells.reserve(sizeof...(fields));
    (cells.push_back(cell(fields)), ...);
    write(cells);
  }

  void write(const std::vector<std::string>& cells);

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(float v) { return format_double(v); }
  template <std::integral I>
  static std::string cell(I v) {
    return std::to_string(v);
  }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(std::string_view v) { return std::string(v); }
  static std::string cell(const char* v) { return v; }

  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace qelab
