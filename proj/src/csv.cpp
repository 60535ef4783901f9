#include "safespeed/csv.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace safespeed {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

CsvReader::CsvReader(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("io error: cannot open " + path);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      header_ = split_csv_line(line);
      first = false;
      continue;
    }
    if (line.empty()) continue;
    rows_.push_back(split_csv_line(line));
  }
  if (first) throw std::runtime_error("schema error: " + path + " is empty (no header row)");
}

int CsvReader::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> CsvReader::require_columns(const std::vector<std::string>& names) const {
  std::vector<int> idx;
  std::string missing;
  for (const auto& n : names) {
    int c = column(n);
    idx.push_back(c);
    if (c < 0) {
      if (!missing.empty()) missing += ", ";
      missing += n;
    }
  }
  if (!missing.empty()) throw std::runtime_error("schema error: missing columns: " + missing);
  return idx;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("io error: cannot write " + tmp);
    out << content;
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("io error: write failed for " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io error: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace safespeed
