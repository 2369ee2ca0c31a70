// SPDX-License-Identifier: Apache-2.0
// Top-degree homogeneous parts of Henon compositions and the indeterminacy
// sets they cut out at infinity. For a composition of elementary factors the
// top part of each coordinate is a single monomial in one variable, so the
// vanishing loci and the regularity conditions are exact symbolic statements
// on (coefficient, exponent, variable) triples; no numerics is involved.

#pragma once

#include <complex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "henonlab/map.hpp"

namespace henonlab {

/// c * x^kx * y^ky with c != 0, or the zero coordinate.
struct Monomial {
  C coeff{0.0};
  int kx = 0;
  int ky = 0;
  bool zero() const { return coeff == C(0.0); }
  int total_degree() const { return kx + ky; }

  C operator()(C x, C y) const {
    if (zero()) return C(0.0);
    C v = coeff;
    for (int i = 0; i < kx; ++i) v *= x;
    for (int i = 0; i < ky; ++i) v *= y;
    return v;
  }
};

struct HomogeneousPart {
  Monomial coord[2];
  int degree = 0;

  std::array<C, 2> operator()(const C2& z) const {
    return {coord[0](z[0], z[1]), coord[1](z[0], z[1])};
  }
};

/// Top part of f (forward) or f^{-1} (backward). For a single factor these
/// are (0, c y^d) and ((c/a) x^d, 0); compositions keep the same shape with
/// the exponents multiplied and the leading coefficients nested.
inline HomogeneousPart top_homogeneous(const HenonMap& map, Direction dir) {
  HomogeneousPart h;
  const auto& fs = map.factors();
  if (dir == Direction::Forward) {
    Monomial top;  // second coordinate; first stays identically zero
    for (std::size_t i = 0; i < fs.size(); ++i) {
      int d = fs[i].p.degree();
      C lead = fs[i].p.leading();
      if (i == 0) {
        top = Monomial{lead, 0, d};
      } else {
        C c = lead;
        for (int k = 0; k < d; ++k) c *= top.coeff;
        top = Monomial{c, top.kx * d, top.ky * d};
      }
    }
    h.coord[0] = Monomial{};  // zero
    h.coord[1] = top;
    h.degree = top.total_degree();
  } else {
    Monomial top;  // first coordinate; second stays identically zero
    for (std::size_t i = fs.size(); i-- > 0;) {
      int d = fs[i].p.degree();
      C lead = fs[i].p.leading() / fs[i].a;
      if (i + 1 == fs.size()) {
        top = Monomial{lead, d, 0};
      } else {
        C c = lead;
        for (int k = 0; k < d; ++k) c *= top.coeff;
        top.coeff = c;
        top.kx *= d;
        top.ky *= d;
      }
    }
    h.coord[0] = top;
    h.coord[1] = Monomial{};
    h.degree = top.total_degree();
  }
  return h;
}

/// A coordinate subspace of the hyperplane at infinity, written in scaled
/// homogeneous coordinates: the set of [v0:...:vk:0] whose coordinates in
/// `forced_zero` vanish. Axis names document the ambient space.
struct IndeterminacySet {
  std::vector<std::string> axes;  // affine coordinate names, t excluded
  std::set<int> forced_zero;      // indices into axes

  bool empty() const { return forced_zero.size() >= axes.size(); }
  int dimension() const {
    // projective dimension inside {t=0}
    return static_cast<int>(axes.size() - forced_zero.size()) - 1;
  }

  std::string render() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < axes.size(); ++i) {
      if (i) os << ':';
      os << (forced_zero.count(static_cast<int>(i)) ? "0" : axes[i]);
    }
    os << ":0]";
    return os.str();
  }
};

namespace homogeneous_detail {

/// Variables forced to zero by "monomial = 0" (indices into a name table).
inline std::set<int> vanishing_vars(const Monomial& m, int var_x, int var_y) {
  std::set<int> s;
  if (m.zero()) return s;  // identically zero: no constraint
  // A monomial vanishes iff one of its variables vanishes. With a single
  // variable per coordinate (the Henon case) the locus is a subspace.
  if (m.kx > 0 && m.ky > 0)
    throw std::logic_error("mixed monomial: locus is not a coordinate subspace");
  if (m.kx > 0) s.insert(var_x);
  if (m.ky > 0) s.insert(var_y);
  return s;
}

}  // namespace homogeneous_detail

/// I+ or I- of the base map: a single point in P^2 ({[1:0:0]} resp. {[0:1:0]}).
inline IndeterminacySet indeterminacy(const HenonMap& map, Sign sign) {
  IndeterminacySet s;
  s.axes = {"x", "y"};
  HomogeneousPart h =
      top_homogeneous(map, sign == Sign::Plus ? Direction::Forward : Direction::Backward);
  for (int c = 0; c < 2; ++c) {
    auto vars = homogeneous_detail::vanishing_vars(h.coord[c], 0, 1);
    if (!h.coord[c].zero())
      for (int v : vars) s.forced_zero.insert(v);
  }
  return s;
}

/// I+^F or I-^F of F(z,w) = (f(z), f^{-1}(w)): lines in P^4.
inline IndeterminacySet indeterminacy(const ProductMap& F, Sign sign) {
  IndeterminacySet s;
  s.axes = {"z1", "z2", "w1", "w2"};
  Direction dz = sign == Sign::Plus ? Direction::Forward : Direction::Backward;
  Direction dw = sign == Sign::Plus ? Direction::Backward : Direction::Forward;
  HomogeneousPart hz = top_homogeneous(F.base(), dz);
  HomogeneousPart hw = top_homogeneous(F.base(), dw);
  for (int c = 0; c < 2; ++c) {
    if (!hz.coord[c].zero())
      for (int v : homogeneous_detail::vanishing_vars(hz.coord[c], 0, 1)) s.forced_zero.insert(v);
    if (!hw.coord[c].zero())
      for (int v : homogeneous_detail::vanishing_vars(hw.coord[c], 2, 3)) s.forced_zero.insert(v);
  }
  return s;
}

struct RegularityReport {
  bool indeterminacy_disjoint = false;  // I+^F and I-^F do not meet
  bool plus_misses_diagonal = false;    // I+^F does not meet the diagonal closure
  bool minus_misses_diagonal = false;
  std::string i_plus;
  std::string i_minus;
  std::string detail;

  bool regular() const {
    return indeterminacy_disjoint && plus_misses_diagonal && minus_misses_diagonal;
  }
};

namespace homogeneous_detail {

inline bool intersection_empty(const IndeterminacySet& a, const IndeterminacySet& b) {
  std::set<int> all = a.forced_zero;
  all.insert(b.forced_zero.begin(), b.forced_zero.end());
  return all.size() >= a.axes.size();
}

/// Intersect a subspace of {t=0} in P^4 with the closed diagonal {z=w}:
/// identify w1~z1, w2~z2 and test whether every coordinate is forced to zero.
inline bool diagonal_intersection_empty(const IndeterminacySet& s) {
  std::set<int> forced;  // over {z1, z2}
  for (int v : s.forced_zero) forced.insert(v % 2);
  return forced.size() >= 2;
}

}  // namespace homogeneous_detail

/// Symbolic verification of the three regularity clauses for F:
/// (i) I+^F and I-^F disjoint, (ii)/(iii) neither meets the diagonal.
/// All three reduce to: f_h(z) = f^{-1}_h(z) = 0 forces z = 0.
inline RegularityReport check_regularity(const ProductMap& F) {
  RegularityReport r;
  IndeterminacySet ip = indeterminacy(F, Sign::Plus);
  IndeterminacySet im = indeterminacy(F, Sign::Minus);
  r.i_plus = ip.render();
  r.i_minus = im.render();
  r.indeterminacy_disjoint = homogeneous_detail::intersection_empty(ip, im);
  r.plus_misses_diagonal = homogeneous_detail::diagonal_intersection_empty(ip);
  r.minus_misses_diagonal = homogeneous_detail::diagonal_intersection_empty(im);
  if (!r.regular()) {
    std::ostringstream os;
    os << "common zero: I+=" << r.i_plus << " I-=" << r.i_minus;
    r.detail = os.str();
  }
  return r;
}

}  // namespace henonlab
