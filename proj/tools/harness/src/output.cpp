#include "zeno_harness/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

namespace zeno::harness {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::string name, std::vector<std::string> header)
    : name_(std::move(name)), header_(std::move(header)) {}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size())
    throw std::logic_error("CSV row for " + name_ + " has " + std::to_string(row.size()) + " cells, header has " +
                           std::to_string(header_.size()));
  std::vector<std::string> r;
  r.reserve(row.size());
  for (auto& c : row) r.push_back(std::move(c.text));
  rows_.push_back(std::move(r));
}

namespace {

std::string join(const std::vector<std::string>& cells, char sep) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += sep;
    s += cells[i];
  }
  return s;
}

}  // namespace

std::string CsvTable::csv(const std::string& hash) const {
  std::string s = "# config_hash=" + hash + "\n" + join(header_, ',') + "\n";
  for (const auto& r : rows_) s += join(r, ',') + "\n";
  return s;
}

std::string CsvTable::dat(const std::string& hash) const {
  std::string s = "# config_hash=" + hash + "\n# " + join(header_, ' ') + "\n";
  for (const auto& r : rows_) s += join(r, ' ') + "\n";
  return s;
}

Json CsvTable::to_json() const {
  Json j;
  j["header"] = header_;
  j["rows"] = rows_;
  return j;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace zeno::harness
