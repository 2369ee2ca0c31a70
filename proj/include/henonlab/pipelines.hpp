// SPDX-License-Identifier: Apache-2.0
// File-producing pipelines behind the CLI subcommands. The verify suite runs
// the same functions under different thread counts to check that outputs are
// byte-identical, so everything here must reduce deterministically.

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "henonlab/currents.hpp"
#include "henonlab/green.hpp"
#include "henonlab/grid.hpp"
#include "henonlab/io.hpp"
#include "henonlab/map.hpp"
#include "henonlab/measure.hpp"
#include "henonlab/mixing.hpp"
#include "henonlab/parallel.hpp"
#include "henonlab/sampler.hpp"

namespace henonlab {

inline GridSpec grow_by_one(const GridSpec& g) {
  GridSpec out = g;
  for (int k = 0; k < 4; ++k) {
    double h = g.h(k);
    out.lo[k] = g.lo[k] - h;
    out.hi[k] = g.hi[k] + h;
    out.res[k] = g.res[k] + 2;
  }
  return out;
}

/// G+ and G- with error bounds at a list of points -> CSV.
inline void write_green_csv(const HenonMap& map, const std::vector<C2>& points,
                            const GreenConfig& cfg, const std::string& path,
                            const std::string& config_hash, const ThreadPool& pool) {
  struct Row {
    GreenResult plus, minus;
  };
  std::vector<Row> rows(points.size());
  pool.parallel_for(points.size(), 64, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      rows[i] = {green_plus(map, points[i], cfg), green_minus(map, points[i], cfg)};
  });
  CsvWriter w(path, config_hash,
              {"x_re", "x_im", "y_re", "y_im", "G_plus", "err_plus", "G_minus", "err_minus"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    w.row({format_double(points[i][0].real()), format_double(points[i][0].imag()),
           format_double(points[i][1].real()), format_double(points[i][1].imag()),
           format_double(rows[i].plus.value), format_double(rows[i].plus.error_bound),
           format_double(rows[i].minus.value), format_double(rows[i].minus.error_bound)});
  }
}

/// Points of a 2-D slice (Re x, Re y) at fixed imaginary parts, row-major
/// with Re y fastest.
inline std::vector<C2> slice_points(double lo, double hi, int res, double im_x, double im_y) {
  std::vector<C2> pts;
  pts.reserve(std::size_t(res) * std::size_t(res));
  double h = (hi - lo) / res;
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j)
      pts.push_back({C(lo + (i + 0.5) * h, im_x), C(lo + (j + 0.5) * h, im_y)});
  return pts;
}

struct MeasureArtifacts {
  CellMeasure raw;         // as produced by the wedge (clamped masses)
  CellMeasure normalized;  // total mass 1
  double raw_signed_mass = 0.0;
  std::vector<std::pair<std::string, double>> defects;  // battery invariance defects
};

inline const std::vector<std::string>& battery_sources() {
  static const std::vector<std::string> b{"x",       "y",           "(^ x 2)",
                                          "(sin x)", "(* x y)",     "(sin (+ x y))"};
  return b;
}

/// mu_n on the given output grid: sample both truncated potentials one layer
/// wider, wedge them, and report the battery invariance defects.
inline MeasureArtifacts build_measure(const HenonMap& map, const GridSpec& out_grid, int n,
                                      const ThreadPool& pool) {
  GridSpec field_grid = grow_by_one(out_grid);
  ScalarField u = sample_field(map, field_grid, Sign::Plus, n, pool);
  ScalarField v = sample_field(map, field_grid, Sign::Minus, n, pool);
  MeasureArtifacts art;
  art.raw = wedge_density(u, v, pool);
  art.raw_signed_mass = wedge_raw_mass(art.raw);
  art.normalized = normalize(art.raw);
  for (const auto& src : battery_sources()) {
    Observable phi = Observable::parse(src);
    double d = invariance_defect(
        art.normalized, map,
        [&](const std::array<double, 4>& c) {
          return phi(std::array<double, 2>{c[0], c[2]});
        },
        pool);
    art.defects.push_back({src, d});
  }
  return art;
}

inline void write_measure_outputs(const MeasureArtifacts& art, const std::string& binary_path,
                                  const std::string& summary_path,
                                  const std::string& config_hash) {
  write_cell_measure(art.raw, binary_path, fnv1a64(config_hash));
  CsvWriter w(summary_path, config_hash, {"quantity", "value"});
  w.row({"total_mass", format_double(art.raw.total_mass)});
  w.row({"raw_signed_mass", format_double(art.raw_signed_mass)});
  w.row({"clamped_mass_fraction", format_double(art.raw.clamped_mass_fraction)});
  for (const auto& [src, d] : art.defects) w.row({"defect " + src, format_double(d)});
}

/// Saddle-orbit enumeration -> CSV, one row per orbit point.
inline PeriodicEnsemble write_periodic_csv(const HenonMap& map, int period,
                                           const NewtonConfig& cfg, const std::string& path,
                                           const std::string& config_hash,
                                           const ThreadPool& pool) {
  PeriodicEnsemble ens = enumerate_periodic(map, period, cfg, pool);
  CsvWriter w(path, config_hash,
              {"code", "point_index", "x", "y", "multiplier_max", "multiplier_min", "residual"});
  for (const auto& orbit : ens.orbits)
    for (std::size_t j = 0; j < orbit.points.size(); ++j)
      w.row({orbit.code.str(), std::to_string(j), format_double(orbit.points[j][0]),
             format_double(orbit.points[j][1]), format_double(orbit.multiplier_max),
             format_double(orbit.multiplier_min), format_double(orbit.residual)});
  return ens;
}

struct MixArtifacts {
  CorrelationSeries series;
  BoundCheckReport bound;
  double phi_norm = 0.0;
  double psi_norm = 0.0;
  bool fit_ok = false;
  DecayFit fit{};
};

inline MixArtifacts run_mix(const DiscreteMeasure& mu, const HenonMap& map, const Observable& phi,
                            const Observable& psi, int n_max,
                            const std::array<double, 2>& box_lo,
                            const std::array<double, 2>& box_hi) {
  MixArtifacts art;
  art.series = correlation_series(mu, map, phi, psi, n_max);
  art.phi_norm = c2_norm(phi, box_lo, box_hi);
  art.psi_norm = c2_norm(psi, box_lo, box_hi);
  art.series.phi_c2 = art.phi_norm;
  art.series.psi_c2 = art.psi_norm;
  art.bound = theorem_bound_check(art.series, map.degree(), art.phi_norm, art.psi_norm);
  auto fit = fit_decay(art.series);
  art.fit_ok = fit.has_value();
  if (fit) art.fit = *fit;
  return art;
}

inline void write_mix_outputs(const MixArtifacts& art, int degree, const std::string& series_path,
                              const std::string& summary_path, const std::string& config_hash) {
  CsvWriter w(series_path, config_hash, {"n", "C_n", "stderr", "r_n"});
  for (std::size_t i = 0; i < art.series.entries.size(); ++i) {
    const auto& e = art.series.entries[i];
    double rn = std::abs(e.value) * std::pow(double(degree), 0.5 * double(e.n)) /
                (art.phi_norm * art.psi_norm);
    w.row({std::to_string(e.n), format_double(e.value), format_double(e.std_error),
           format_double(rn)});
  }
  std::ofstream js(summary_path);
  if (!js) throw std::runtime_error("cannot open " + summary_path);
  js << "{\n";
  js << "  \"config\": \"" << config_hash << "\",\n";
  js << "  \"measure\": \"" << art.series.measure_descriptor << "\",\n";
  js << "  \"phi\": \"" << art.series.phi_descriptor << "\",\n";
  js << "  \"psi\": \"" << art.series.psi_descriptor << "\",\n";
  js << "  \"phi_c2\": " << format_double(art.phi_norm) << ",\n";
  js << "  \"psi_c2\": " << format_double(art.psi_norm) << ",\n";
  js << "  \"usable_window\": " << art.bound.window << ",\n";
  js << "  \"sup_r\": " << format_double(art.bound.sup_r) << ",\n";
  js << "  \"bound_shape_pass\": " << (art.bound.pass ? "true" : "false") << ",\n";
  if (art.fit_ok)
    js << "  \"decay_rate\": " << format_double(art.fit.rate) << ",\n";
  else
    js << "  \"decay_rate\": null,\n";
  js << "  \"flagged_atoms\": " << art.series.flagged_atoms << "\n";
  js << "}\n";
}

/// Grayscale slice of a Green potential at fixed imaginary parts.
inline void write_render_pgm(const HenonMap& map, Sign side, const GreenConfig& cfg, double lo,
                             double hi, int res, double im_x, double im_y,
                             const std::string& path, const std::string& config_hash,
                             const ThreadPool& pool) {
  std::vector<C2> pts = slice_points(lo, hi, res, im_x, im_y);
  std::vector<double> vals(pts.size());
  pool.parallel_for(pts.size(), 256, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      vals[i] = side == Sign::Plus ? green_plus(map, pts[i], cfg).value
                                   : green_minus(map, pts[i], cfg).value;
  });
  double vmin = vals[0], vmax = vals[0];
  for (double v : vals) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  write_pgm16(path, vals, res, res, vmin, vmax, config_hash);
}

}  // namespace henonlab
