// CSV emission helpers. Numbers are printed with std::to_chars (shortest
// round-trip form), so identical values always serialize to identical bytes;
// files are written to a temporary sibling and renamed into place.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace wiretap {

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(long v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(int v) { return format_number(static_cast<long>(v)); }

inline void atomic_write_file(const std::filesystem::path& path,
                              std::string_view contents) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    }
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) {
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns)
      : columns_(std::move(columns)) {
    if (columns_.empty()) {
      throw std::invalid_argument("CsvTable: need at least one column");
    }
  }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) {
      throw std::invalid_argument("CsvTable: row width mismatch");
    }
    rows_.push_back(std::move(cells));
  }

  std::string str() const {
    std::string out;
    append_line(out, columns_);
    for (const auto& row : rows_) append_line(out, row);
    return out;
  }

  void write(const std::filesystem::path& path) const {
    atomic_write_file(path, str());
  }

  std::size_t row_count() const { return rows_.size(); }

 private:
  static void append_line(std::string& out,
                          const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace wiretap
