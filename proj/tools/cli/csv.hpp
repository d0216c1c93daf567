// Minimal RFC-4180 writer/reader for the numeric tables the CLI produces.
// Fields never contain commas or quotes, so no quoting is needed.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace sobolev_cli {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }
inline std::string fmt(bool b) { return b ? "1" : "0"; }
template <class I>
  requires std::is_integral_v<I>
inline std::string fmt(I v) {
  return std::to_string(v);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << "\r\n";
  }

  template <class... Ts>
  void row(const Ts&... fields) {
    std::string line;
    ((line += fmt(fields), line += ','), ...);
    line.pop_back();
    out_ << line << "\r\n";
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Header-indexed table of string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::size_t> index;

  std::size_t col(const std::string& name) const {
    const auto it = index.find(name);
    if (it == index.end()) throw std::runtime_error("missing column " + name);
    return it->second;
  }
  const std::string& str(std::size_t r, const std::string& name) const { return rows[r][col(name)]; }
  /// NaN for empty cells.
  double num(std::size_t r, const std::string& name) const {
    const std::string& s = str(r, name);
    return s.empty() ? std::nan("") : std::stod(s);
  }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::optional<CsvTable> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (first) {
      t.header = cells;
      for (std::size_t i = 0; i < cells.size(); ++i) t.index[cells[i]] = i;
      first = false;
    } else {
      cells.resize(t.header.size());
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) return std::nullopt;
  return t;
}

}  // namespace sobolev_cli
