// SPDX-License-Identifier: Apache-2.0
// Grid realization of the truncated Green currents dd^c G^(n) and of their
// wedge product, the measure approximants mu_n. Normalization throughout:
// dd^c = (i/pi) d dbar, which gives log-type potentials unit mass, so the
// limit wedge is a probability measure.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "henonlab/green.hpp"
#include "henonlab/grid.hpp"
#include "henonlab/map.hpp"
#include "henonlab/parallel.hpp"

namespace henonlab {

/// Tabulates the horizon-n potential G^(n) at cell centers: cells with no
/// escape within n iterates carry exactly 0, escaped cells the tail-refined
/// Green value.
inline ScalarField sample_field(const HenonMap& map, const GridSpec& grid, Sign side, int n,
                                const ThreadPool& pool = ThreadPool(1)) {
  grid.validate();
  if (n < 0) throw std::invalid_argument("sample_field: n must be >= 0");
  ScalarField f;
  f.grid = grid;
  f.side = side == Sign::Plus ? '+' : '-';
  f.n = n;
  f.values.resize(grid.cell_count());
  Direction dir = side == Sign::Plus ? Direction::Forward : Direction::Backward;
  double kappa = tail_kappa(map, dir);
  double radius =
      side == Sign::Plus ? escape_radius(map) : escape_radius_backward(map);
  GreenConfig cfg;
  cfg.n_max = n;
  f.error_bound = std::pow(double(map.degree()), -double(n)) *
                  std::max(kappa / (map.degree() - 1.0), std::log(std::max(1.0, radius * kappa)));
  pool.parallel_for(grid.cell_count(), 8192, [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      auto c = grid.center(grid.unflatten(idx));
      C2 z{C(c[0], c[1]), C(c[2], c[3])};
      f.values[idx] = side == Sign::Plus ? green_plus(map, z, cfg).value
                                         : green_minus(map, z, cfg).value;
    }
  });
  return f;
}

/// Entries of the complex Hessian (d^2 u / dz_i dzbar_j) at one cell, by
/// central differences with the grid step. Hermitian by construction: the
/// diagonal is real, the single mixed entry determines the other.
struct ComplexHessian {
  double u11 = 0.0;
  double u22 = 0.0;
  C u12{0.0, 0.0};
};

inline ComplexHessian complex_hessian(const ScalarField& f, const std::array<int, 4>& i) {
  const GridSpec& g = f.grid;
  for (int k = 0; k < 4; ++k)
    if (i[k] < 1 || i[k] >= g.res[k] - 1)
      throw std::out_of_range("complex_hessian: boundary-layer cell");
  auto at = [&](int d0, int d1, int d2, int d3) {
    return f.at({i[0] + d0, i[1] + d1, i[2] + d2, i[3] + d3});
  };
  const double u0 = at(0, 0, 0, 0);
  const double h0 = g.h(0), h1 = g.h(1), h2 = g.h(2), h3 = g.h(3);

  auto second = [&](int axis, double h) {
    int d[4] = {0, 0, 0, 0};
    d[axis] = 1;
    return (at(d[0], d[1], d[2], d[3]) + at(-d[0], -d[1], -d[2], -d[3]) - 2.0 * u0) / (h * h);
  };
  auto mixed = [&](int ax, double ha, int bx, double hb) {
    int p[4] = {0, 0, 0, 0};
    p[ax] = 1;
    p[bx] = 1;
    int q[4] = {0, 0, 0, 0};
    q[ax] = 1;
    q[bx] = -1;
    return (at(p[0], p[1], p[2], p[3]) + at(-p[0], -p[1], -p[2], -p[3]) -
            at(q[0], q[1], q[2], q[3]) - at(-q[0], -q[1], -q[2], -q[3])) /
           (4.0 * ha * hb);
  };

  ComplexHessian h;
  // d^2/dz dzbar = (1/4)(d^2/dRe^2 + d^2/dIm^2) per coordinate
  h.u11 = 0.25 * (second(0, h0) + second(1, h1));
  h.u22 = 0.25 * (second(2, h2) + second(3, h3));
  // d^2/dz1 dzbar2 = (1/4)[(u_{x1 x2} + u_{y1 y2}) + i (u_{x1 y2} - u_{y1 x2})]
  double re = mixed(0, h0, 2, h2) + mixed(1, h1, 3, h3);
  double im = mixed(0, h0, 3, h3) - mixed(1, h1, 2, h2);
  h.u12 = 0.25 * C(re, im);
  return h;
}

/// dd^c u ^ dd^c v realized cell by cell:
///   D = u_{11} v_{22} + u_{22} v_{11} - 2 Re(u_{12} conj(v_{12}))
///   mass = (4/pi^2) D * cell volume,
/// on the grid shrunk by one boundary layer. Negative raw densities are
/// clamped to zero; the clamped fraction (|negative| over |raw| mass) is
/// reported rather than redistributed.
inline CellMeasure wedge_density(const ScalarField& u, const ScalarField& v,
                                 const ThreadPool& pool = ThreadPool(1)) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("wedge_density: grid mismatch");
  CellMeasure m;
  m.grid = u.grid.shrink_by_one();
  m.mass.resize(m.grid.cell_count());
  const double scale = 4.0 / (M_PI * M_PI) * u.grid.cell_volume();
  struct Acc {
    double pos = 0.0;
    double neg = 0.0;
  };
  Acc total = parallel_map_reduce<Acc>(
      pool, m.grid.cell_count(), 4096,
      [&](std::size_t b, std::size_t e) {
        Acc acc;
        for (std::size_t idx = b; idx < e; ++idx) {
          auto ii = m.grid.unflatten(idx);
          std::array<int, 4> src{ii[0] + 1, ii[1] + 1, ii[2] + 1, ii[3] + 1};
          ComplexHessian hu = complex_hessian(u, src);
          ComplexHessian hv = complex_hessian(v, src);
          double density = hu.u11 * hv.u22 + hu.u22 * hv.u11 -
                           2.0 * (hu.u12.real() * hv.u12.real() + hu.u12.imag() * hv.u12.imag());
          double raw = scale * density;
          if (raw >= 0.0) {
            m.mass[idx] = raw;
            acc.pos += raw;
          } else {
            m.mass[idx] = 0.0;
            acc.neg -= raw;
          }
        }
        return acc;
      },
      [](const Acc& a, const Acc& b) {
        return Acc{a.pos + b.pos, a.neg + b.neg};
      });
  m.total_mass = total.pos;
  double denom = total.pos + total.neg;
  m.clamped_mass_fraction = denom > 0.0 ? total.neg / denom : 0.0;
  return m;
}

/// Raw (pre-clamp) signed total of the wedge: the cohomological mass check.
inline double wedge_raw_mass(const CellMeasure& m) {
  if (!(m.total_mass > 0.0) || m.clamped_mass_fraction >= 1.0) return 0.0;
  return m.total_mass * (1.0 - 2.0 * m.clamped_mass_fraction) / (1.0 - m.clamped_mass_fraction);
}

inline CellMeasure normalize(const CellMeasure& in) {
  if (!(in.total_mass > 0.0)) throw std::invalid_argument("normalize: zero-mass measure");
  CellMeasure m = in;
  double s = 1.0 / in.total_mass;
  for (double& x : m.mass) x *= s;
  m.total_mass = 1.0;
  return m;
}

/// Sum of mass(cell) * phi(cell center); deterministic pairwise reduction.
template <class Fn>
double integrate(const CellMeasure& m, Fn&& phi, const ThreadPool& pool = ThreadPool(1)) {
  return parallel_map_reduce<double>(
      pool, m.mass.size(), 8192,
      [&](std::size_t b, std::size_t e) {
        std::vector<double> terms;
        terms.reserve(e - b);
        for (std::size_t idx = b; idx < e; ++idx) {
          if (m.mass[idx] == 0.0) {
            terms.push_back(0.0);
            continue;
          }
          terms.push_back(m.mass[idx] * phi(m.grid.center(m.grid.unflatten(idx))));
        }
        return pairwise_sum(terms);
      },
      [](double a, double b) { return a + b; });
}

/// |<m, phi o f> - <m, phi>| with phi o f through exact forward evaluation.
template <class Fn>
double invariance_defect(const CellMeasure& m, const HenonMap& map, Fn&& phi,
                         const ThreadPool& pool = ThreadPool(1)) {
  double direct = integrate(m, phi, pool);
  double pushed = integrate(
      m,
      [&](const std::array<double, 4>& c) {
        C2 z{C(c[0], c[1]), C(c[2], c[3])};
        C2 fz = map.forward(z);
        return phi(std::array<double, 4>{fz[0].real(), fz[0].imag(), fz[1].real(), fz[1].imag()});
      },
      pool);
  return std::abs(pushed - direct);
}

}  // namespace henonlab
