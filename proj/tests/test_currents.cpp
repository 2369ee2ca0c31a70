// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "henonlab/currents.hpp"
#include "henonlab/mapfile.hpp"
#include "henonlab/measure.hpp"

using namespace henonlab;

namespace {

ScalarField field_from(const GridSpec& g, double (*fn)(const std::array<double, 4>&)) {
  ScalarField f;
  f.grid = g;
  f.values.resize(g.cell_count());
  for (std::size_t i = 0; i < g.cell_count(); ++i) f.values[i] = fn(g.center(g.unflatten(i)));
  return f;
}

double abs_z1_sq(const std::array<double, 4>& c) { return c[0] * c[0] + c[1] * c[1]; }
double abs_z2_sq(const std::array<double, 4>& c) { return c[2] * c[2] + c[3] * c[3]; }
// Re(z1 * conj(z2)) = x1 x2 + y1 y2
double re_z1_z2bar(const std::array<double, 4>& c) { return c[0] * c[2] + c[1] * c[3]; }
// Re(z1^2) = x1^2 - y1^2 (pluriharmonic)
double re_z1_sq(const std::array<double, 4>& c) { return c[0] * c[0] - c[1] * c[1]; }
// log euclidean norm of (z1, z2)
double log_norm2(const std::array<double, 4>& c) {
  return 0.5 * std::log(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
}

GridSpec cube(double half, int n) {
  GridSpec g;
  g.lo = {-half, -half, -half, -half};
  g.hi = {half, half, half, half};
  g.res = {n, n, n, n};
  return g;
}

}  // namespace

TEST_CASE("hessian stencil is exact on complex quadratics") {
  GridSpec g = cube(1.0, 8);
  std::array<int, 4> mid{4, 3, 4, 3};

  ComplexHessian h1 = complex_hessian(field_from(g, abs_z1_sq), mid);
  CHECK(h1.u11 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(h1.u22) < 1e-9);
  CHECK(std::abs(h1.u12) < 1e-9);

  ComplexHessian h2 = complex_hessian(field_from(g, re_z1_z2bar), mid);
  CHECK(std::abs(h2.u11) < 1e-9);
  CHECK(std::abs(h2.u22) < 1e-9);
  CHECK(h2.u12.real() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(h2.u12.imag()) < 1e-9);

  // dd^c annihilates pluriharmonic potentials
  ComplexHessian h3 = complex_hessian(field_from(g, re_z1_sq), mid);
  CHECK(std::abs(h3.u11) < 1e-9);
  CHECK(std::abs(h3.u22) < 1e-9);
  CHECK(std::abs(h3.u12) < 1e-9);
}

TEST_CASE("dd^c annihilates pluriharmonic potentials in sup norm") {
  // Re(z1^2 z2) is pluriharmonic; every interior Hessian entry must vanish
  GridSpec g = cube(1.2, 6);
  ScalarField f = field_from(g, [](const std::array<double, 4>& c) {
    C z1(c[0], c[1]), z2(c[2], c[3]);
    return (z1 * z1 * z2).real();
  });
  for (int i0 = 1; i0 < 5; ++i0)
    for (int i1 = 1; i1 < 5; ++i1)
      for (int i2 = 1; i2 < 5; ++i2)
        for (int i3 = 1; i3 < 5; ++i3) {
          ComplexHessian h = complex_hessian(f, {i0, i1, i2, i3});
          CHECK(std::abs(h.u11) <= 1e-8);
          CHECK(std::abs(h.u22) <= 1e-8);
          CHECK(std::abs(h.u12) <= 1e-8);
        }
}

TEST_CASE("wedge mass approaches 1 monotonically on the resolution ladder") {
  HenonMap map = standard_map();
  ThreadPool pool;
  double prev_gap = 1e300;
  for (int res : {8, 16, 24}) {
    GridSpec g = cube(6.0, res + 2);
    ScalarField u = sample_field(map, g, Sign::Plus, 8, pool);
    ScalarField v = sample_field(map, g, Sign::Minus, 8, pool);
    CellMeasure m = wedge_density(u, v, pool);
    double gap = std::abs(wedge_raw_mass(m) - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.01);
}

TEST_CASE("hessian rejects boundary cells") {
  GridSpec g = cube(1.0, 6);
  ScalarField f = field_from(g, abs_z1_sq);
  CHECK_THROWS_AS(complex_hessian(f, {0, 3, 3, 3}), std::out_of_range);
  CHECK_THROWS_AS(complex_hessian(f, {3, 3, 3, 5}), std::out_of_range);
}

TEST_CASE("wedge of |z1|^2 and |z2|^2 has constant density 4/pi^2") {
  GridSpec g = cube(1.0, 8);
  ScalarField u = field_from(g, abs_z1_sq);
  ScalarField v = field_from(g, abs_z2_sq);
  CellMeasure m = wedge_density(u, v);
  double inner_volume = std::pow(2.0 - 2.0 * g.h(0), 4);
  CHECK(m.total_mass == doctest::Approx(4.0 / (M_PI * M_PI) * inner_volume).epsilon(1e-9));
  CHECK(m.clamped_mass_fraction == 0.0);

  // degenerate directions: u = v = |z1|^2 wedges to zero
  CellMeasure zero = wedge_density(u, u);
  CHECK(zero.total_mass == 0.0);
}

TEST_CASE("wedge is symmetric") {
  GridSpec g = cube(1.5, 6);
  HenonMap map = standard_map();
  ScalarField u = sample_field(map, g, Sign::Plus, 4);
  ScalarField v = sample_field(map, g, Sign::Minus, 4);
  CellMeasure uv = wedge_density(u, v);
  CellMeasure vu = wedge_density(v, u);
  REQUIRE(uv.mass.size() == vu.mass.size());
  for (std::size_t i = 0; i < uv.mass.size(); ++i) CHECK(uv.mass[i] == vu.mass[i]);
  CHECK(uv.total_mass == vu.total_mass);
}

TEST_CASE("normalization oracle: dd^c log+|z1| ^ dd^c log+|z2| has mass 1") {
  // The wedge of the two cylinder potentials is the uniform probability
  // measure on the torus |z1| = |z2| = 1: two kink hypersurfaces crossing
  // transversally, the same geometry the Green wedge meets. Total mass 1
  // pins the 4/pi^2 normalization against an independent potential pair.
  ThreadPool pool;
  GridSpec g = cube(1.5, 24);
  ScalarField u = field_from(g, [](const std::array<double, 4>& c) {
    return std::max(0.0, 0.5 * std::log(c[0] * c[0] + c[1] * c[1]));
  });
  ScalarField v = field_from(g, [](const std::array<double, 4>& c) {
    return std::max(0.0, 0.5 * std::log(c[2] * c[2] + c[3] * c[3]));
  });
  CellMeasure m = wedge_density(u, v, pool);
  CHECK(wedge_raw_mass(m) == doctest::Approx(1.0).epsilon(0.02));
  // mass concentrates where both kinks cross: atoms near the torus
  DiscreteMeasure atoms = atoms_from_cells(normalize(m), 1e-4);
  for (const auto& a : atoms.atoms) {
    CHECK(std::hypot(a[0], a[1]) == doctest::Approx(1.0).epsilon(0.2));
    CHECK(std::hypot(a[2], a[3]) == doctest::Approx(1.0).epsilon(0.2));
  }
}

TEST_CASE("sample_field: far escape-region values match log norm") {
  HenonMap map = standard_map();
  GridSpec g;
  g.lo = {1.0e4, -0.5, 1.2e4, -0.5};
  g.hi = {1.1e4, 0.5, 1.3e4, 0.5};
  g.res = {4, 4, 4, 4};
  ScalarField f = sample_field(map, g, Sign::Plus, 10);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    auto c = g.center(g.unflatten(i));
    double expect = std::log(std::max(std::hypot(c[0], c[1]), std::hypot(c[2], c[3])));
    CHECK(f.values[i] == doctest::Approx(expect).epsilon(1e-3));
  }
}

TEST_CASE("sample_field: zero inside the filled Julia set at horizon n") {
  HenonMap map = standard_map();
  double fp = 1.0 + std::sqrt(11.0);
  // small enough that nothing reaches the escape region within 6 iterates
  GridSpec g;
  g.lo = {fp - 1e-7, -1e-7, fp - 1e-7, -1e-7};
  g.hi = {fp + 1e-7, 1e-7, fp + 1e-7, 1e-7};
  g.res = {3, 3, 3, 3};
  ScalarField f = sample_field(map, g, Sign::Plus, 6);
  // tiny box around the fixed point: no escape within the horizon
  for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("refining resolution preserves coinciding cell-center values") {
  HenonMap map = standard_map();
  GridSpec g1 = cube(2.0, 4);
  GridSpec g3 = cube(2.0, 12);  // odd multiple: every g1 center appears in g3
  ScalarField f1 = sample_field(map, g1, Sign::Plus, 5);
  ScalarField f3 = sample_field(map, g3, Sign::Plus, 5);
  for (int i0 = 0; i0 < 4; ++i0)
    for (int i1 = 0; i1 < 4; ++i1)
      for (int i2 = 0; i2 < 4; ++i2)
        for (int i3 = 0; i3 < 4; ++i3) {
          std::array<int, 4> a{i0, i1, i2, i3};
          std::array<int, 4> b{3 * i0 + 1, 3 * i1 + 1, 3 * i2 + 1, 3 * i3 + 1};
          CHECK(f1.at(a) == f3.at(b));
        }
}

TEST_CASE("normalize") {
  CellMeasure m;
  m.grid = cube(1.0, 2);
  m.mass.assign(m.grid.cell_count(), 0.125);
  m.total_mass = 0.125 * double(m.grid.cell_count());
  CellMeasure n1 = normalize(m);
  CHECK(n1.total_mass == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n1.mass[0] == doctest::Approx(0.125 / m.total_mass).epsilon(1e-15));
  CellMeasure n2 = normalize(n1);
  for (std::size_t i = 0; i < n1.mass.size(); ++i)
    CHECK(n2.mass[i] == doctest::Approx(n1.mass[i]).epsilon(1e-15));

  CellMeasure z;
  z.grid = m.grid;
  z.mass.assign(m.grid.cell_count(), 0.0);
  z.total_mass = 0.0;
  CHECK_THROWS_AS(normalize(z), std::invalid_argument);
}

TEST_CASE("integrate: constants, locality, linearity") {
  HenonMap map = standard_map();
  ThreadPool pool;
  GridSpec g = cube(6.0, 10);
  ScalarField u = sample_field(map, g, Sign::Plus, 6, pool);
  ScalarField v = sample_field(map, g, Sign::Minus, 6, pool);
  CellMeasure m = normalize(wedge_density(u, v, pool));

  CHECK(integrate(m, [](const std::array<double, 4>&) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // smooth bump away from the support integrates to ~0
  double bump = integrate(m, [](const std::array<double, 4>& c) {
    double dx = c[0] - 5.5, dy = c[2] - 5.5;
    double r2 = dx * dx + dy * dy;
    return r2 < 0.25 ? std::exp(-1.0 / (0.25 - r2)) : 0.0;
  });
  CHECK(std::abs(bump) < 1e-6);

  auto phi = [](const std::array<double, 4>& c) { return c[0]; };
  auto psi = [](const std::array<double, 4>& c) { return std::sin(c[2]); };
  double a = 1.7, b = -0.4;
  double lhs =
      integrate(m, [&](const std::array<double, 4>& c) { return a * phi(c) + b * psi(c); });
  double rhs = a * integrate(m, phi) + b * integrate(m, psi);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("invariance defect vanishes for constants") {
  HenonMap map = standard_map();
  GridSpec g = cube(6.0, 8);
  ScalarField u = sample_field(map, g, Sign::Plus, 5);
  ScalarField v = sample_field(map, g, Sign::Minus, 5);
  CellMeasure m = normalize(wedge_density(u, v));
  double d = invariance_defect(m, map, [](const std::array<double, 4>&) { return 4.2; });
  CHECK(d < 1e-12);
}

TEST_CASE("cell measure binary round trip") {
  HenonMap map = standard_map();
  GridSpec g = cube(3.0, 6);
  ScalarField u = sample_field(map, g, Sign::Plus, 4);
  ScalarField v = sample_field(map, g, Sign::Minus, 4);
  CellMeasure m = wedge_density(u, v);
  auto path = std::filesystem::temp_directory_path() / "henonlab_measure_test.bin";
  write_cell_measure(m, path.string());
  CellMeasure r = read_cell_measure(path.string());
  CHECK(r.grid == m.grid);
  CHECK(r.total_mass == m.total_mass);
  CHECK(r.clamped_mass_fraction == m.clamped_mass_fraction);
  REQUIRE(r.mass.size() == m.mass.size());
  for (std::size_t i = 0; i < m.mass.size(); ++i) CHECK(r.mass[i] == m.mass[i]);
  std::filesystem::remove(path);

  CHECK_THROWS(read_cell_measure("/nonexistent/path.bin"));
}
