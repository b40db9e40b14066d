#pragma once

// Deterministic run artifacts: CSV time series, JSON summaries and manifests,
// config fingerprints.  Every writer is byte-stable: fixed %.17g formatting,
// insertion-ordered JSON, no clocks, no locale dependence.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace warplab {

using ojson = nlohmann::ordered_json;

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size())
      throw std::invalid_argument("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
  }
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path.string());
  size_t start = 0;
  while (start <= line.size()) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) comma = line.size();
    table.columns.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    start = 0;
    while (start <= line.size()) {
      size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      // strtod instead of stod: stod rejects subnormals with out_of_range
      std::string cell = line.substr(start, comma - start);
      char* end = nullptr;
      double value = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error("read_csv: bad numeric cell '" + cell + "' in " + path.string());
      row.push_back(value);
      start = comma + 1;
    }
    table.add_row(std::move(row));
  }
  return table;
}

inline void write_json(const std::filesystem::path& path, const ojson& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_json: cannot open " + path.string());
  out << doc.dump(2) << '\n';
}

inline ojson read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_json: cannot open " + path.string());
  return ojson::parse(in);
}

// FNV-1a over the canonical (sorted-key, compact) serialization, so two
// configs that parse to the same document always fingerprint identically.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_fingerprint(const ojson& doc) {
  nlohmann::json sorted = nlohmann::json::parse(doc.dump());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(sorted.dump())));
  return buf;
}

}  // namespace warplab
