#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qfc {

/// Buffered CSV table; numbers use the shortest round-trip form so identical
/// inputs give identical bytes. Written atomically on save().
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& cell(double v);
  CsvTable& cell(long long v);
  CsvTable& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvTable& cell(std::string_view v);
  void end_row();

  std::size_t rows() const { return rows_; }
  const std::string& text() const { return buf_; }
  void save(const std::string& path) const;

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::size_t in_row_ = 0;
  std::string buf_;
};

/// Write to a sibling temporary file, then rename over `path`.
void atomic_write(const std::string& path, std::string_view bytes);

std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace qfc
