#include "nac/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace nac {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(std::uint64_t v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (in_row_ == columns_) throw std::logic_error("CSV row has too many cells in " + path_);
  out_ << (in_row_ ? "," : "") << v;
  ++in_row_;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("CSV row has too few cells in " + path_);
  out_ << '\n';
  in_row_ = 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace nac
