#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace nls::lab {

/// %.17g, which round-trips every double. NaN becomes an empty field.
std::string format_double(double v);

/// RFC-4180 quoting: fields with comma, quote, CR or LF are wrapped in quotes
/// with embedded quotes doubled.
std::string csv_escape(std::string_view field);

class CsvRow {
 public:
  CsvRow& add(double v);
  CsvRow& add(long v);
  CsvRow& add(int v) { return add(static_cast<long>(v)); }
  CsvRow& add(std::string_view s);
  CsvRow& add(const char* s) { return add(std::string_view(s)); }
  CsvRow& add(bool b) { return add(b ? 1L : 0L); }
  CsvRow& empty();
  const std::vector<std::string>& cells() const { return cells_; }

 private:
  std::vector<std::string> cells_;
};

/// Header on construction, CRLF line endings, one writer per file.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void write(const CsvRow& row);
  std::size_t columns() const { return header_.size(); }

 private:
  void line(const std::vector<std::string>& cells);
  std::ofstream os_;
  std::vector<std::string> header_;
};

/// Parses RFC-4180 text into rows of fields (test and diagnose helper).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace nls::lab
