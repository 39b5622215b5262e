#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace krip {

/// Shortest round-trip decimal form; locale-independent and identical
/// across runs, which keeps CSV output byte-stable.
inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t value) {
  return std::to_string(value);
}

/// Minimal CSV assembly: fixed header, one row at a time, no quoting
/// (cells never contain commas here).
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
      throw std::logic_error("CsvTable: row width mismatch");
    rows_.push_back(std::move(cells));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string to_string() const {
    std::string out;
    append_line(out, header_);
    for (const auto& row : rows_) append_line(out, row);
    return out;
  }

 private:
  static void append_line(std::string& out,
                          const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += cells[i];
    }
    out.push_back('\n');
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace krip
