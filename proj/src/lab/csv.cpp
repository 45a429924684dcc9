#include "nls/lab/csv.hpp"

#include <cmath>
#include <cstdio>

#include "nls/error.hpp"

namespace nls::lab {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvRow& CsvRow::add(double v) {
  cells_.push_back(format_double(v));
  return *this;
}
CsvRow& CsvRow::add(long v) {
  cells_.push_back(std::to_string(v));
  return *this;
}
CsvRow& CsvRow::add(std::string_view s) {
  cells_.push_back(csv_escape(s));
  return *this;
}
CsvRow& CsvRow::empty() {
  cells_.emplace_back();
  return *this;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : os_(path, std::ios::binary | std::ios::trunc), header_(std::move(header)) {
  if (!os_) throw ConfigError("cannot open " + path.string() + " for writing");
  std::vector<std::string> esc;
  for (const auto& h : header_) esc.push_back(csv_escape(h));
  line(esc);
}

void CsvWriter::write(const CsvRow& row) {
  if (row.cells().size() != header_.size())
    throw PreconditionError("csv row has " + std::to_string(row.cells().size()) + " cells, header has " +
                            std::to_string(header_.size()));
  line(row.cells());
}

void CsvWriter::line(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os_ << ',';
    os_ << cells[i];
  }
  os_ << "\r\n";
  os_.flush();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') quoted = true;
    else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace nls::lab
