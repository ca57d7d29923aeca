#include "qfc/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qfc/errors.hpp"

namespace qfc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void atomic_write(const std::string& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw ConfigError("CsvTable: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += header[i];
  }
  buf_ += '\n';
}

CsvTable& CsvTable::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvTable& CsvTable::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvTable& CsvTable::cell(std::string_view v) {
  if (in_row_ == columns_) throw ConfigError("CsvTable: too many cells in row");
  if (in_row_) buf_ += ',';
  buf_ += v;
  ++in_row_;
  return *this;
}

void CsvTable::end_row() {
  if (in_row_ != columns_) throw ConfigError("CsvTable: row has the wrong number of cells");
  buf_ += '\n';
  in_row_ = 0;
  ++rows_;
}

void CsvTable::save(const std::string& path) const {
  if (in_row_) throw ConfigError("CsvTable: unfinished row");
  atomic_write(path, buf_);
}

}  // namespace qfc
