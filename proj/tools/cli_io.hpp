#pragma once

// File I/O helpers for the command-line tool: CSV matrices at full double
// precision (17 significant digits, so write/read round-trips are exact)
// and flat edge lists.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

struct CliError {
  int exit_code;
  std::string message;
};

inline void write_matrix_csv(const std::filesystem::path& path, const double* data,
                             std::int64_t rows, std::int64_t cols) {
  std::ofstream out(path);
  if (!out) throw CliError{3, "cannot open " + path.string() + " for writing"};
  for (std::int64_t j = 0; j < cols; ++j) {
    out << (j ? ",v" : "v") << (j + 1);
  }
  out << "\n";
  char buf[64];
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data[i * cols + j]);
      if (j) out << ',';
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw CliError{3, "failed writing " + path.string()};
}

inline std::vector<double> read_matrix_csv(const std::filesystem::path& path,
                                           std::int64_t& rows, std::int64_t& cols) {
  std::ifstream in(path);
  if (!in) throw CliError{3, "cannot open " + path.string()};
  std::string line;
  if (!std::getline(in, line)) throw CliError{3, path.string() + ": empty file"};
  cols = static_cast<std::int64_t>(std::count(line.begin(), line.end(), ',')) + 1;

  std::vector<double> values;
  rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::int64_t count = 0;
    const char* ptr = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(ptr, &end);
      if (end == ptr) throw CliError{3, path.string() + ": malformed number"};
      values.push_back(v);
      ++count;
      ptr = end;
      if (*ptr == ',') {
        ++ptr;
      } else {
        break;
      }
    }
    if (count != cols) throw CliError{3, path.string() + ": ragged row"};
    ++rows;
  }
  if (rows == 0) throw CliError{3, path.string() + ": no data rows"};
  return values;
}

inline void write_edges_csv(const std::filesystem::path& path, const std::int64_t* edges,
                            std::int64_t count) {
  std::ofstream out(path);
  if (!out) throw CliError{3, "cannot open " + path.string() + " for writing"};
  out << "j,jp\n";
  for (std::int64_t i = 0; i < count; ++i) {
    out << edges[2 * i] << ',' << edges[2 * i + 1] << "\n";
  }
  if (!out) throw CliError{3, "failed writing " + path.string()};
}

inline std::vector<std::int64_t> read_edges_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CliError{3, "cannot open " + path.string()};
  std::string line;
  if (!std::getline(in, line)) throw CliError{3, path.string() + ": empty file"};
  std::vector<std::int64_t> edges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::int64_t a = 0, b = 0;
    if (std::sscanf(line.c_str(), "%" SCNd64 ",%" SCNd64, &a, &b) != 2) {
      throw CliError{3, path.string() + ": malformed edge row"};
    }
    edges.push_back(a);
    edges.push_back(b);
  }
  return edges;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
