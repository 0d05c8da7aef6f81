#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "v2i/scenario.hpp"

namespace v2i {

/// RFC-4180 style writer with `#`-prefixed metadata lines ahead of the header.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(std::string_view text) { out_ << "# " << text << '\n'; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(cells[i]);
    }
    out_ << '\n';
  }

  static std::string quote(std::string_view cell) {
    if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
    std::string q = "\"";
    for (char c : cell) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }

 private:
  std::ostream& out_;
};

inline std::string cell(double x) { return format_number(x); }
inline std::string cell(std::uint32_t x) { return std::to_string(x); }
inline std::string cell(std::uint64_t x) { return std::to_string(x); }
inline std::string cell(bool x) { return x ? "true" : "false"; }

}  // namespace v2i
