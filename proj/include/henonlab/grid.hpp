// SPDX-License-Identifier: Apache-2.0
// 4-d grids over (Re x, Im x, Re y, Im y), sampled potentials, and cell
// measures, with the binary on-disk layout used by the `measure` subcommand.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace henonlab {

struct GridSpec {
  std::array<double, 4> lo{-6.0, -6.0, -6.0, -6.0};
  std::array<double, 4> hi{6.0, 6.0, 6.0, 6.0};
  std::array<int, 4> res{16, 16, 16, 16};

  void validate() const {
    for (int k = 0; k < 4; ++k) {
      if (!(hi[k] > lo[k])) throw std::invalid_argument("grid: empty box interval");
      if (res[k] < 1) throw std::invalid_argument("grid: resolution must be positive");
    }
  }

  double h(int k) const { return (hi[k] - lo[k]) / res[k]; }
  double cell_volume() const { return h(0) * h(1) * h(2) * h(3); }
  std::size_t cell_count() const {
    return std::size_t(res[0]) * std::size_t(res[1]) * std::size_t(res[2]) * std::size_t(res[3]);
  }

  // row-major, last index fastest
  std::size_t flatten(const std::array<int, 4>& i) const {
    return ((std::size_t(i[0]) * res[1] + i[1]) * res[2] + i[2]) * res[3] + i[3];
  }
  std::array<int, 4> unflatten(std::size_t f) const {
    std::array<int, 4> i{};
    i[3] = int(f % res[3]);
    f /= res[3];
    i[2] = int(f % res[2]);
    f /= res[2];
    i[1] = int(f % res[1]);
    f /= res[1];
    i[0] = int(f);
    return i;
  }

  std::array<double, 4> center(const std::array<int, 4>& i) const {
    return {lo[0] + (i[0] + 0.5) * h(0), lo[1] + (i[1] + 0.5) * h(1),
            lo[2] + (i[2] + 0.5) * h(2), lo[3] + (i[3] + 0.5) * h(3)};
  }

  /// Grid with one cell layer peeled off each face; cell centers of the
  /// result coincide with interior cell centers of *this.
  GridSpec shrink_by_one() const {
    GridSpec g = *this;
    for (int k = 0; k < 4; ++k) {
      if (res[k] < 3) throw std::invalid_argument("grid: too coarse to shrink");
      g.lo[k] = lo[k] + h(k);
      g.hi[k] = hi[k] - h(k);
      g.res[k] = res[k] - 2;
    }
    return g;
  }

  bool operator==(const GridSpec& o) const { return lo == o.lo && hi == o.hi && res == o.res; }
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;  // one per cell center
  char side = '+';
  int n = 0;
  double error_bound = 0.0;

  double at(const std::array<int, 4>& i) const { return values[grid.flatten(i)]; }
};

struct CellMeasure {
  GridSpec grid;
  std::vector<double> mass;  // nonnegative after clamping
  double total_mass = 0.0;
  double clamped_mass_fraction = 0.0;
};

// --- binary cell-mass file --------------------------------------------------
// Little-endian layout:
//   bytes 0..7   magic "HLMEAS01"
//   uint32       version (1)
//   uint64       config hash (as stamped on the CSV outputs)
//   uint32[4]    resolution
//   double[8]    box (lo0, hi0, lo1, hi1, lo2, hi2, lo3, hi3)
//   double       total_mass
//   double       clamped_mass_fraction
//   uint64       cell count
//   double[...]  masses, row-major (last index fastest)

inline void write_cell_measure(const CellMeasure& m, const std::string& path,
                               std::uint64_t config_hash = 0) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write("HLMEAS01", 8);
  std::uint32_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&config_hash), 8);
  for (int k = 0; k < 4; ++k) {
    std::uint32_t r = std::uint32_t(m.grid.res[k]);
    out.write(reinterpret_cast<const char*>(&r), 4);
  }
  for (int k = 0; k < 4; ++k) {
    out.write(reinterpret_cast<const char*>(&m.grid.lo[k]), 8);
    out.write(reinterpret_cast<const char*>(&m.grid.hi[k]), 8);
  }
  out.write(reinterpret_cast<const char*>(&m.total_mass), 8);
  out.write(reinterpret_cast<const char*>(&m.clamped_mass_fraction), 8);
  std::uint64_t count = m.mass.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  out.write(reinterpret_cast<const char*>(m.mass.data()),
            std::streamsize(m.mass.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline CellMeasure read_cell_measure(const std::string& path,
                                     std::uint64_t* config_hash = nullptr) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "HLMEAS01", 8) != 0)
    throw std::runtime_error(path + ": not a cell-measure file");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != 1) throw std::runtime_error(path + ": unsupported version");
  std::uint64_t hash = 0;
  in.read(reinterpret_cast<char*>(&hash), 8);
  if (config_hash) *config_hash = hash;
  CellMeasure m;
  for (int k = 0; k < 4; ++k) {
    std::uint32_t r = 0;
    in.read(reinterpret_cast<char*>(&r), 4);
    m.grid.res[k] = int(r);
  }
  for (int k = 0; k < 4; ++k) {
    in.read(reinterpret_cast<char*>(&m.grid.lo[k]), 8);
    in.read(reinterpret_cast<char*>(&m.grid.hi[k]), 8);
  }
  in.read(reinterpret_cast<char*>(&m.total_mass), 8);
  in.read(reinterpret_cast<char*>(&m.clamped_mass_fraction), 8);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 8);
  m.grid.validate();
  if (count != m.grid.cell_count()) throw std::runtime_error(path + ": cell count mismatch");
  m.mass.resize(count);
  in.read(reinterpret_cast<char*>(m.mass.data()), std::streamsize(count * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated file");
  return m;
}

}  // namespace henonlab
