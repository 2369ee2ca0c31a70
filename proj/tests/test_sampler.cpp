// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "henonlab/mapfile.hpp"
#include "henonlab/sampler.hpp"

using namespace henonlab;

// Frozen oracles for the standard map (y^2 - 10, a = 1):
//   fixed points:  y = 1 +- sqrt(11)               (quadratic formula)
//   2-cycle:       y-values the roots of t^2 + 2t - 6 (sum -2, product c+4)
namespace {
const double kFixPlus = 1.0 + std::sqrt(11.0);
const double kFixMinus = 1.0 - std::sqrt(11.0);
const double kTwoCycleA = -1.0 + std::sqrt(7.0);
const double kTwoCycleB = -1.0 - std::sqrt(7.0);
}  // namespace

TEST_CASE("symbol codes canonicalize by minimal rotation") {
  CHECK(SymbolCode::from_string("110").str() == "011");
  CHECK(SymbolCode::from_string("0101").str() == "0101");
  CHECK(SymbolCode::from_string("1010") == SymbolCode::from_string("0101"));
  CHECK(SymbolCode::from_string("0101").primitive_period() == 2);
  CHECK(SymbolCode::from_string("0111").primitive_period() == 4);
  CHECK(SymbolCode::from_string("0101").primitive().str() == "01");
  CHECK_THROWS_AS(SymbolCode::from_string("012"), std::invalid_argument);
}

TEST_CASE("necklace counts match the classical formula") {
  // (1/n) sum_{d|n} phi(d) 2^{n/d}
  CHECK(necklaces(1).size() == 2);
  CHECK(necklaces(2).size() == 3);
  CHECK(necklaces(3).size() == 4);
  CHECK(necklaces(4).size() == 6);
  CHECK(necklaces(12).size() == 352);
  // total points carried by primitives of length dividing n is 2^n
  for (int n : {1, 2, 3, 4, 6, 8}) {
    std::size_t pts = 0;
    for (const auto& w : necklaces(n)) pts += std::size_t(w.primitive_period());
    CHECK(pts == (std::size_t(1) << n));
  }
}

TEST_CASE("horseshoe certificate") {
  HenonMap m = standard_map();
  HorseshoeReport rep = horseshoe_check(m, 5.0);
  CHECK(rep.certified);
  // strips approach |y| in [sqrt(10 - 2 s*), sqrt(10 + 2 s*)], s* = 1+sqrt(11)
  double s = kFixPlus;
  CHECK(rep.strip_inner == doctest::Approx(std::sqrt(10.0 - 2.0 * s)).epsilon(1e-6));
  CHECK(rep.strip_outer == doctest::Approx(std::sqrt(10.0 + 2.0 * s)).epsilon(1e-6));
  CHECK(rep.gap > 2.0);
  CHECK(rep.expansion > 1.0);

  HenonMap weak({HenonFactor(Polynomial{C(-1.0), C(0.0), C(1.0)}, C(0.3))});
  HorseshoeReport rep2 = horseshoe_check(weak, 5.0);
  CHECK_FALSE(rep2.certified);

  CHECK_THROWS_AS(horseshoe_check(HenonMap({HenonFactor(
                      Polynomial{C(-10.0), C(0.0), C(1.0), C(1.0)}, C(1.0))}), 5.0),
                  std::invalid_argument);
}

TEST_CASE("anti-integrable seeds") {
  HenonMap m = standard_map();
  double r = std::sqrt(10.0);

  auto s1 = seed_orbit(SymbolCode::from_string("1"), m);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0][0] == doctest::Approx(r));
  CHECK(s1[0][1] == doctest::Approx(r));

  auto s0 = seed_orbit(SymbolCode::from_string("0"), m);
  CHECK(s0[0][0] == doctest::Approx(-r));
  CHECK(s0[0][1] == doctest::Approx(-r));

  auto s10 = seed_orbit(SymbolCode::from_string("10"), m);  // canonical "01"
  REQUIRE(s10.size() == 2);
  CHECK(s10[0][1] == doctest::Approx(-r));
  CHECK(s10[1][1] == doctest::Approx(r));
  CHECK(s10[0][0] == doctest::Approx(r));   // x_0 = y_1 cyclically
  CHECK(s10[1][0] == doctest::Approx(-r));

  HenonMap pos({HenonFactor(Polynomial{C(2.0), C(0.0), C(1.0)}, C(1.0))});
  CHECK_THROWS_AS(seed_orbit(SymbolCode::from_string("1"), pos), std::invalid_argument);
}

TEST_CASE("newton refinement hits the quadratic-formula fixed points") {
  HenonMap m = standard_map();
  auto plus = refine_orbit(m, SymbolCode::from_string("1"));
  REQUIRE(plus.has_value());
  CHECK(plus->points[0][0] == doctest::Approx(kFixPlus).epsilon(1e-12));
  CHECK(plus->points[0][1] == doctest::Approx(kFixPlus).epsilon(1e-12));
  CHECK(plus->residual <= 1e-12);
  CHECK(plus->saddle());

  auto minus = refine_orbit(m, SymbolCode::from_string("0"));
  REQUIRE(minus.has_value());
  CHECK(minus->points[0][1] == doctest::Approx(kFixMinus).epsilon(1e-12));

  // multipliers of the fixed point: eigenvalues of [[0,1],[-1,2y]]
  double y = kFixPlus;
  double lam = std::abs(y + std::sqrt(y * y - 1.0));
  CHECK(plus->multiplier_max == doctest::Approx(lam).epsilon(1e-10));
  CHECK(plus->multiplier_min == doctest::Approx(1.0 / lam).epsilon(1e-10));
}

TEST_CASE("newton refinement finds the genuine 2-cycle") {
  HenonMap m = standard_map();
  auto orb = refine_orbit(m, SymbolCode::from_string("01"));
  REQUIRE(orb.has_value());
  REQUIRE(orb->points.size() == 2);
  std::set<int> seen;
  for (const auto& p : orb->points) {
    if (std::abs(p[1] - kTwoCycleA) < 1e-10) seen.insert(0);
    if (std::abs(p[1] - kTwoCycleB) < 1e-10) seen.insert(1);
  }
  CHECK(seen.size() == 2);
  // genuinely period 2: f(x) != x, f^2(x) = x
  R2 p0 = orb->points[0];
  R2 f1 = m.forward_real(p0);
  R2 f2 = m.forward_real(f1);
  CHECK(std::max(std::abs(f1[0] - p0[0]), std::abs(f1[1] - p0[1])) > 1.0);
  CHECK(std::abs(f2[0] - p0[0]) < 1e-10);
  CHECK(std::abs(f2[1] - p0[1]) < 1e-10);
}

TEST_CASE("enumeration counts 2^n points with recovered codes and saddles") {
  HenonMap m = standard_map();
  ThreadPool pool;
  for (int n : {1, 2, 3, 5, 8}) {
    PeriodicEnsemble ens = enumerate_periodic(m, n, {}, pool);
    CHECK(ens.complete);
    CHECK(ens.failures.empty());
    CHECK(ens.total_points() == (std::size_t(1) << n));
    for (const auto& o : ens.orbits) {
      CHECK(o.residual <= 1e-12);
      CHECK(o.saddle());
      // code recovery: sign pattern of y reproduces the code
      std::vector<std::uint8_t> bits;
      for (const auto& p : o.points) bits.push_back(p[1] > 0.0);
      CHECK(SymbolCode(bits) == o.code);
    }
  }
}

TEST_CASE("period-2 ensemble contains both fixed points and the 2-cycle") {
  HenonMap m = standard_map();
  PeriodicEnsemble ens = enumerate_periodic(m, 2);
  REQUIRE(ens.orbits.size() == 3);
  CHECK(ens.orbits[0].points.size() + ens.orbits[1].points.size() +
            ens.orbits[2].points.size() ==
        4);
  std::set<std::string> codes;
  for (const auto& o : ens.orbits) codes.insert(o.code.str());
  CHECK(codes == std::set<std::string>{"0", "01", "1"});
}

TEST_CASE("uncertified parameters are refused unless overridden") {
  HenonMap weak({HenonFactor(Polynomial{C(-1.0), C(0.0), C(1.0)}, C(0.3))});
  CHECK_THROWS_AS(enumerate_periodic(weak, 3), std::runtime_error);
  // override runs anyway; completeness is whatever it is
  PeriodicEnsemble ens = enumerate_periodic(weak, 1, {}, ThreadPool(1), true);
  CHECK(ens.period == 1);
}
