#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace nac {

/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double v);

/// Minimal CSV writer: a header row, then rows of numbers or strings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::uint64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& v);
  void end_row();

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// Splits one CSV line on commas (no quoting support).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace nac
