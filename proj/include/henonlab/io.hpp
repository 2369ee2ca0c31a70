// SPDX-License-Identifier: Apache-2.0
// Output conventions shared by the CLI: CSV files with a config-hash header
// line, 16-bit binary PGM images, and the FNV-1a hash that stamps outputs.
// All numeric text is printed with %.17g so identical runs are byte-identical.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace henonlab {

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    out_ << "# henonlab " << kVersion << " config=" << config_hash << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  void comment(const std::string& line) { out_ << "# " << line << "\n"; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

/// 16-bit PGM (P5, maxval 65535, most significant byte first per netpbm).
/// Values are mapped linearly from [vmin, vmax]; the range and config hash
/// are recorded in header comments.
inline void write_pgm16(const std::string& path, const std::vector<double>& values, int width,
                        int height, double vmin, double vmax, const std::string& config_hash) {
  if (values.size() != std::size_t(width) * std::size_t(height))
    throw std::invalid_argument("pgm: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n";
  out << "# henonlab " << kVersion << " config=" << config_hash << "\n";
  out << "# range " << format_double(vmin) << " " << format_double(vmax) << "\n";
  out << width << " " << height << "\n65535\n";
  double span = vmax > vmin ? vmax - vmin : 1.0;
  std::vector<unsigned char> bytes;
  bytes.reserve(values.size() * 2);
  for (double v : values) {
    double t = (v - vmin) / span;
    t = t < 0.0 ? 0.0 : t > 1.0 ? 1.0 : t;
    auto q = static_cast<std::uint16_t>(t * 65535.0 + 0.5);
    bytes.push_back(static_cast<unsigned char>(q >> 8));
    bytes.push_back(static_cast<unsigned char>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace henonlab
