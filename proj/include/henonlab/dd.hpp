// SPDX-License-Identifier: Apache-2.0
// Double-double scalar (~31 significant digits) built from error-free
// transforms. Used where plain doubles lose an orbit too early: points
// seeded close to the filled Julia set drift off at the local expansion
// rate, which caps usable horizons near 20 iterates in double precision.

#pragma once

#include <cmath>
#include <cstdlib>

namespace henonlab {

struct DD {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DD() = default;
  constexpr DD(double h) : hi(h), lo(0.0) {}
  constexpr DD(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi; }
};

namespace dd_detail {

inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

// requires |a| >= |b|
inline DD quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline DD two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline DD operator+(DD a, DD b) {
  DD s = dd_detail::two_sum(a.hi, b.hi);
  DD t = dd_detail::two_sum(a.lo, b.lo);
  DD r = dd_detail::quick_two_sum(s.hi, s.lo + t.hi);
  return dd_detail::quick_two_sum(r.hi, r.lo + t.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }

inline DD operator*(DD a, DD b) {
  DD p = dd_detail::two_prod(a.hi, b.hi);
  double lo = p.lo + (a.hi * b.lo + a.lo * b.hi);
  return dd_detail::quick_two_sum(p.hi, lo);
}

inline DD operator/(DD a, DD b) {
  double q1 = a.hi / b.hi;
  DD r = a - DD(q1) * b;
  double q2 = r.hi / b.hi;
  r = r - DD(q2) * b;
  double q3 = r.hi / b.hi;
  DD q = dd_detail::quick_two_sum(q1, q2);
  return q + DD(q3);
}

inline DD operator+(DD a, double b) { return a + DD(b); }
inline DD operator-(DD a, double b) { return a - DD(b); }
inline DD operator*(DD a, double b) { return a * DD(b); }
inline DD operator/(DD a, double b) { return a / DD(b); }
inline DD operator*(double a, DD b) { return DD(a) * b; }
inline DD operator+(double a, DD b) { return DD(a) + b; }
inline DD operator-(double a, DD b) { return DD(a) - b; }

inline bool operator<(DD a, DD b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DD a, DD b) { return b < a; }
inline bool operator<=(DD a, DD b) { return !(b < a); }
inline bool operator>=(DD a, DD b) { return !(a < b); }

inline DD abs(DD a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline DD sqrt(DD a) {
  if (a.hi <= 0.0) return DD(std::sqrt(a.hi));
  double y = std::sqrt(a.hi);
  // one dd Newton step from the double estimate
  DD r = DD(y) + (a - DD(y) * DD(y)) / (2.0 * y);
  return r;
}

}  // namespace henonlab
