#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace safespeed {

// Minimal delimited-text reader for the pipeline's comma-separated inputs.
// Fields are split on ',' with no quoting; trailing '\r' is stripped.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path);  // throws on missing file

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

  // Column index by exact header name, -1 if absent.
  int column(const std::string& name) const;

  // Throws a schema error listing every missing column.
  std::vector<int> require_columns(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> split_csv_line(const std::string& line);

// Writes content to "<path>.tmp" and renames it into place, so a failed run
// never leaves a partial output behind.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // throws on missing file

}  // namespace safespeed
