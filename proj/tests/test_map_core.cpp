// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <random>

#include "henonlab/homogeneous.hpp"
#include "henonlab/map.hpp"
#include "henonlab/mapfile.hpp"

using namespace henonlab;

namespace {

// --- test-side oracle: dense bivariate polynomials over C -----------------
// Composes Henon factors symbolically so top_homogeneous and degree can be
// checked against an independent expansion.

using BiPoly = std::map<std::pair<int, int>, C>;

BiPoly bp_const(C c) { return {{{0, 0}, c}}; }
BiPoly bp_var(int which) {  // 0: x, 1: y
  return which == 0 ? BiPoly{{{1, 0}, C(1.0)}} : BiPoly{{{0, 1}, C(1.0)}};
}

BiPoly bp_add(const BiPoly& a, const BiPoly& b) {
  BiPoly r = a;
  for (const auto& [k, v] : b) {
    r[k] += v;
    if (r[k] == C(0.0)) r.erase(k);
  }
  return r;
}

BiPoly bp_scale(const BiPoly& a, C s) {
  BiPoly r;
  if (s == C(0.0)) return r;
  for (const auto& [k, v] : a) r[k] = v * s;
  return r;
}

BiPoly bp_mul(const BiPoly& a, const BiPoly& b) {
  BiPoly r;
  for (const auto& [ka, va] : a)
    for (const auto& [kb, vb] : b) {
      auto key = std::make_pair(ka.first + kb.first, ka.second + kb.second);
      r[key] += va * vb;
      if (r[key] == C(0.0)) r.erase(key);
    }
  return r;
}

int bp_degree(const BiPoly& a) {
  int d = 0;
  for (const auto& [k, v] : a) d = std::max(d, k.first + k.second);
  return d;
}

BiPoly bp_top(const BiPoly& a) {
  BiPoly r;
  int d = bp_degree(a);
  for (const auto& [k, v] : a)
    if (k.first + k.second == d) r[k] = v;
  return r;
}

// symbolic composition of the map's factors applied to (x, y)
std::pair<BiPoly, BiPoly> symbolic_forward(const HenonMap& m) {
  BiPoly X = bp_var(0), Y = bp_var(1);
  for (const auto& f : m.factors()) {
    // p(Y) via Horner
    BiPoly pY = bp_const(f.p.coeffs().back());
    for (std::size_t i = f.p.coeffs().size() - 1; i-- > 0;)
      pY = bp_add(bp_mul(pY, Y), bp_const(f.p.coeffs()[i]));
    BiPoly nx = Y;
    BiPoly ny = bp_add(pY, bp_scale(X, -f.a));
    X = nx;
    Y = ny;
  }
  return {X, Y};
}

HenonMap std_map() { return standard_map(); }

HenonMap two_factor_map() {
  return HenonMap({HenonFactor(Polynomial{C(-10.0), C(0.0), C(1.0)}, C(1.0)),
                   HenonFactor(Polynomial{C(-2.0), C(0.5), C(1.0)}, C(0.0, 2.0))});
}

std::mt19937_64 rng(42);

C2 random_point(double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {C(u(rng), u(rng)), C(u(rng), u(rng))};
}

}  // namespace

TEST_CASE("factor evaluation matches direct substitution") {
  HenonMap m = std_map();
  C2 out = eval_forward(m, {C(0.0), C(0.0)});
  CHECK(out[0] == C(0.0));
  CHECK(out[1] == C(-10.0));

  // fixed point (1+sqrt(11), 1+sqrt(11)); roots of y^2 - 2y - 10
  double fp = 1.0 + std::sqrt(11.0);
  C2 q{C(fp), C(fp)};
  C2 img = eval_forward(m, q);
  CHECK(std::abs(img[0] - q[0]) < 1e-12);
  CHECK(std::abs(img[1] - q[1]) < 1e-12);
}

TEST_CASE("two-factor composition equals sequential factor application") {
  HenonMap m = two_factor_map();
  C2 z{C(0.3, -0.1), C(1.1, 0.4)};
  C2 step = m.factors()[0].forward(z);
  step = m.factors()[1].forward(step);
  C2 whole = eval_forward(m, z);
  CHECK(std::abs(step[0] - whole[0]) == 0.0);
  CHECK(std::abs(step[1] - whole[1]) == 0.0);
}

TEST_CASE("backward inverts forward") {
  HenonMap m = std_map();
  C2 z{C(0.0), C(-10.0)};
  C2 back = eval_backward(m, z);
  CHECK(std::abs(back[0]) < 1e-15);
  CHECK(std::abs(back[1]) < 1e-15);

  C2 p{C(0.3), C(-1.7)};
  C2 rt = eval_backward(m, eval_forward(m, p));
  CHECK(std::abs(rt[0] - p[0]) < 1e-12);
  CHECK(std::abs(rt[1] - p[1]) < 1e-12);

  // factor with a=2: backward of (1,1) is ((p(1)-1)/2, 1)
  HenonMap m2({HenonFactor(Polynomial{C(-10.0), C(0.0), C(1.0)}, C(2.0))});
  C2 b = eval_backward(m2, {C(1.0), C(1.0)});
  CHECK(std::abs(b[0] - C((-9.0 - 1.0) / 2.0)) < 1e-15);
  CHECK(b[1] == C(1.0));
}

TEST_CASE("round-trip property over random points") {
  for (const HenonMap& m : {std_map(), two_factor_map()}) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      C2 z = random_point(2.0);
      C2 rt = eval_backward(m, eval_forward(m, z));
      double num = std::max(std::abs(rt[0] - z[0]), std::abs(rt[1] - z[1]));
      double den = std::max(1.0, norm_inf(z));
      worst = std::max(worst, num / den);
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("degree is multiplicative and shared with the inverse") {
  CHECK(degree(std_map()) == 2);
  CHECK(degree(two_factor_map()) == 4);
  HenonMap m3({HenonFactor(Polynomial{C(1.0), C(0.0), C(1.0)}, C(1.0)),
               HenonFactor(Polynomial{C(0.0), C(0.0), C(0.0), C(2.0)}, C(1.0))});
  CHECK(degree(m3) == 6);
  // d+ = d- : backward top part has the same total degree
  CHECK(top_homogeneous(m3, Direction::Backward).degree == 6);
  CHECK(top_homogeneous(m3, Direction::Forward).degree == 6);
}

TEST_CASE("jacobian determinant") {
  CHECK(jacobian_det(std_map()) == C(1.0));
  HenonMap m({HenonFactor(Polynomial{C(-1.0), C(0.0), C(1.0)}, C(2.0)),
              HenonFactor(Polynomial{C(-1.0), C(0.0), C(1.0)}, C(0.0, 3.0))});
  CHECK(jacobian_det(m) == C(0.0, 6.0));
}

TEST_CASE("jacobian determinant matches finite differences") {
  HenonMap m({HenonFactor(Polynomial{C(-3.0, 0.5), C(1.0), C(2.0)}, C(0.7, -0.2))});
  C2 z{C(0.4, 0.1), C(-0.3, 0.2)};
  const double h = 1e-6;
  // complex central differences of each coordinate function
  auto fwd = [&](C2 q) { return eval_forward(m, q); };
  C d00 = (fwd({z[0] + h, z[1]})[0] - fwd({z[0] - h, z[1]})[0]) / (2 * h);
  C d01 = (fwd({z[0], z[1] + h})[0] - fwd({z[0], z[1] - h})[0]) / (2 * h);
  C d10 = (fwd({z[0] + h, z[1]})[1] - fwd({z[0] - h, z[1]})[1]) / (2 * h);
  C d11 = (fwd({z[0], z[1] + h})[1] - fwd({z[0], z[1] - h})[1]) / (2 * h);
  C det = d00 * d11 - d01 * d10;
  CHECK(std::abs(det - jacobian_det(m)) < 1e-6);
}

TEST_CASE("top homogeneous parts against symbolic composition") {
  // single factor: forward (0, y^2), backward (x^2, 0)
  HomogeneousPart hf = top_homogeneous(std_map(), Direction::Forward);
  CHECK(hf.degree == 2);
  CHECK(hf.coord[0].zero());
  CHECK(hf.coord[1].coeff == C(1.0));
  CHECK(hf.coord[1].kx == 0);
  CHECK(hf.coord[1].ky == 2);

  HomogeneousPart hb = top_homogeneous(std_map(), Direction::Backward);
  CHECK(hb.coord[0].coeff == C(1.0));
  CHECK(hb.coord[0].kx == 2);
  CHECK(hb.coord[1].zero());

  // compositions: compare with the independent symbolic expansion
  for (const HenonMap& m : {two_factor_map(),
                            HenonMap({HenonFactor(Polynomial{C(1.0), C(2.0), C(3.0)}, C(1.5)),
                                      HenonFactor(Polynomial{C(0.5), C(0.0), C(-2.0)}, C(1.0))})}) {
    auto [X, Y] = symbolic_forward(m);
    CHECK(bp_degree(Y) == m.degree());
    BiPoly top = bp_top(Y);
    HomogeneousPart h = top_homogeneous(m, Direction::Forward);
    REQUIRE(top.size() == 1);
    auto [key, coeff] = *top.begin();
    CHECK(key.first == h.coord[1].kx);
    CHECK(key.second == h.coord[1].ky);
    CHECK(std::abs(coeff - h.coord[1].coeff) < 1e-12 * std::abs(coeff));
    CHECK(h.coord[0].zero());
    CHECK(bp_degree(X) < m.degree());  // first coordinate drops out of the top part
  }
}

TEST_CASE("homogeneous part dominates along rays") {
  HenonMap m = two_factor_map();
  HomogeneousPart h = top_homogeneous(m, Direction::Forward);
  int d = m.degree();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    C2 dir{C(u(rng), u(rng)), C(u(rng), u(rng))};
    double prev = 1e300;
    for (double r : {1e3, 1e4, 1e5}) {
      C2 z{dir[0] * r, dir[1] * r};
      auto fz = eval_forward(m, z);
      auto hz = h(z);
      double gap = std::max(std::abs(fz[0] - hz[0]), std::abs(fz[1] - hz[1]));
      double rel = gap / std::pow(norm_inf(z), d);
      CHECK(rel < prev * 0.9);  // decays toward zero along the ray
      prev = rel;
    }
    CHECK(prev < 1e-2);
  }
}

TEST_CASE("indeterminacy sets of the base map") {
  HenonMap m = std_map();
  IndeterminacySet ip = indeterminacy(m, Sign::Plus);
  CHECK(ip.render() == "[x:0:0]");
  CHECK(ip.dimension() == 0);  // a single point [1:0:0]
  IndeterminacySet im = indeterminacy(m, Sign::Minus);
  CHECK(im.render() == "[0:y:0]");
}

TEST_CASE("product map: evaluation, degree, indeterminacy, regularity") {
  HenonMap base = std_map();
  ProductMap F = build_product(base);
  CHECK(F.degree() == 2);

  std::array<C2, 2> q{{{C(0.0), C(0.0)}, {C(0.0), C(-10.0)}}};
  auto img = F.forward(q);
  CHECK(img[0][1] == C(-10.0));
  CHECK(std::abs(img[1][0]) < 1e-15);
  CHECK(std::abs(img[1][1]) < 1e-15);

  for (int i = 0; i < 50; ++i) {
    std::array<C2, 2> p{random_point(2.0), random_point(2.0)};
    auto rt = F.backward(F.forward(p));
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < 2; ++k) CHECK(std::abs(rt[c][k] - p[c][k]) < 1e-10);
  }

  IndeterminacySet ip = indeterminacy(F, Sign::Plus);
  CHECK(ip.render() == "[z1:0:0:w2:0]");
  CHECK(ip.dimension() == 1);
  IndeterminacySet im = indeterminacy(F, Sign::Minus);
  CHECK(im.render() == "[0:z2:w1:0:0]");

  RegularityReport rep = check_regularity(F);
  CHECK(rep.indeterminacy_disjoint);
  CHECK(rep.plus_misses_diagonal);
  CHECK(rep.minus_misses_diagonal);
  CHECK(rep.regular());

  RegularityReport rep2 = check_regularity(build_product(two_factor_map()));
  CHECK(rep2.regular());
}

TEST_CASE("degenerate factors are rejected at construction") {
  CHECK_THROWS_AS(HenonFactor(Polynomial{C(-10.0), C(0.0), C(1.0)}, C(0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(HenonFactor(Polynomial{C(1.0), C(1.0)}, C(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(HenonMap({}), std::invalid_argument);
}

TEST_CASE("map files parse and reject bad input") {
  HenonMap m = map_from_string(R"({"factors": [{"p": [-10, 0, 1], "a": [1, 0]}]})");
  CHECK(m.degree() == 2);
  CHECK(m.jacobian_det() == C(1.0));

  CHECK_THROWS_AS(map_from_string(R"({"factors": [{"p": [-10, 0, 1], "a": 0}]})"),
                  MapParseError);
  CHECK_THROWS_AS(map_from_string(R"({"factors": [{"p": [1, 2], "a": 1}]})"), MapParseError);
  CHECK_THROWS_AS(map_from_string(R"({"factors": []})"), MapParseError);
  CHECK_THROWS_AS(map_from_string("not json"), MapParseError);
  CHECK_THROWS_AS(map_from_string(R"({"factors": [{"p": [-10, 0, 1]}]})"), MapParseError);

  // round trip through the writer
  HenonMap m2 = map_from_json(map_to_json(two_factor_map()));
  CHECK(m2.degree() == 4);
}

TEST_CASE("overflow signals escaped-to-infinity with factor index") {
  HenonMap m = std_map();
  C2 huge{C(1e300), C(1e300)};
  CHECK_THROWS_AS(m.forward(m.forward(huge)), EscapedToInfinity);
}
