#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zeno_harness/config.hpp"

namespace zeno::harness {

/// Shortest round-trip text, at most 17 significant digits, locale free.
std::string format_number(double v);

class CsvTable {
 public:
  CsvTable(std::string name, std::vector<std::string> header);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  /// Cells are numbers, integers or plain strings.
  struct Cell {
    std::string text;
    Cell(double v) : text(format_number(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long v) : text(std::to_string(v)) {}
    Cell(std::size_t v) : text(std::to_string(v)) {}
    Cell(bool v) : text(v ? "1" : "0") {}
    Cell(const char* s) : text(s) {}
    Cell(std::string s) : text(std::move(s)) {}
  };
  void add(std::vector<Cell> row);

  /// "# config_hash=..." line, header, rows.
  std::string csv(const std::string& hash) const;
  /// Whitespace-separated columns with a commented header for gnuplot.
  std::string dat(const std::string& hash) const;
  Json to_json() const;

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a temporary file in the same directory, then renames.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace zeno::harness
