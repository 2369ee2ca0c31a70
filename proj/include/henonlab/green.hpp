// SPDX-License-Identifier: Apache-2.0
// Green functions G+/G- of a Henon map and the Green function of the
// product automorphism F(z,w) = (f(z), f^{-1}(w)).
//
// G+(z) = lim d^{-n} log+ ||f^n(z)||_inf. The evaluator iterates in plain
// complex arithmetic until an iterate enters the escape region
// V+ = {|y| >= max(|x|, R)}, then switches each coordinate to the
// representation exp(L)*u with |u| = 1 and keeps iterating there, so no
// orbit ever overflows. Post-escape iterates refine the value by the exact
// telescoping increments d^{-(j+1)} (L_{j+1} - d L_j); the un-measured tail
// is bounded by the geometric series with the per-map constant kappa.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "henonlab/dd.hpp"
#include "henonlab/map.hpp"

namespace henonlab {

struct GreenConfig {
  int n_max = 60;              // escape-search horizon (whole-map applications)
  double escape_radius = 0.0;  // 0: use the per-map computed radius
  int tail_refinements = 3;    // measured post-escape refinement steps
};

struct GreenResult {
  double value = 0.0;
  double error_bound = 0.0;
  std::optional<int> escape_iter;  // nullopt: bounded within horizon, value 0
  char side = '+';                 // '+', '-', or 'F'
};

/// Escape radius for forward iteration: on {|y| >= max(|x|, R)} every factor
/// satisfies |p(y) - a x| >= 2|y|, so orbits entering the region leave at a
/// guaranteed geometric rate. Per factor R is the positive root of
/// |c_d| r^2 - (2+|a|) r - S = 0 with S the sum of lower |coefficients|; the
/// map radius is the max over factors.
inline double escape_radius(const HenonMap& map) {
  double r = 0.0;
  for (const auto& f : map.factors()) {
    double lead = std::abs(f.p.leading());
    double s = f.p.lower_abs_sum();
    double b = 2.0 + std::abs(f.a);
    r = std::max(r, (b + std::sqrt(b * b + 4.0 * lead * s)) / (2.0 * lead));
  }
  return r;
}

/// Mirror radius for backward iteration on {|x| >= max(|y|, R)}:
/// |p(x) - y| >= 2|a||x| there, i.e. the inverse factor doubles |x|.
inline double escape_radius_backward(const HenonMap& map) {
  double r = 0.0;
  for (const auto& f : map.factors()) {
    double lead = std::abs(f.p.leading());
    double s = f.p.lower_abs_sum();
    double b = 1.0 + 2.0 * std::abs(f.a);
    r = std::max(r, (b + std::sqrt(b * b + 4.0 * lead * s)) / (2.0 * lead));
  }
  return r;
}

/// Tail constant: once escaped, |y'| / |y|^d stays within a factor 2 of the
/// leading coefficient, so each unmeasured refinement term is at most
/// d^{-j} kappa.
inline double tail_kappa(const HenonMap& map, Direction dir) {
  double k = 0.0;
  for (const auto& f : map.factors()) {
    double lead = std::abs(f.p.leading());
    if (dir == Direction::Backward) lead /= std::abs(f.a);
    k = std::max(k, std::abs(std::log(lead)));
  }
  return std::log(2.0) + k;
}

namespace green_detail {

constexpr double kLogZero = -1.0e300;
constexpr double kLogBig = 1.0e6;    // beyond this only the top term survives
constexpr double kCartLimit = 1e100; // switch Cart -> Log before overflow

/// One C^2 state, either as plain complex coordinates or as per-coordinate
/// (log-magnitude, unit) pairs. u == 0 encodes an exact zero coordinate.
struct CoordState {
  bool log_rep = false;
  C2 z{};                       // valid when !log_rep
  double L[2] = {0.0, 0.0};     // valid when log_rep
  C u[2] = {C(0.0), C(0.0)};

  void to_log() {
    if (log_rep) return;
    for (int i = 0; i < 2; ++i) {
      double m = std::abs(z[i]);
      if (m == 0.0) {
        L[i] = kLogZero;
        u[i] = C(0.0);
      } else {
        L[i] = std::log(m);
        u[i] = z[i] / m;
      }
    }
    log_rep = true;
  }

  double log_norm() const {
    if (log_rep) return std::max(L[0], L[1]);
    double m = norm_inf(z);
    return m == 0.0 ? kLogZero : std::log(m);
  }

  double coord_log(int i) const {
    if (log_rep) return L[i];
    double m = std::abs(z[i]);
    return m == 0.0 ? kLogZero : std::log(m);
  }
};

inline C unit_of(C v) {
  double m = std::abs(v);
  return m == 0.0 ? C(0.0) : v / m;
}

inline C unit_pow(C u, int k) {
  C r(1.0);
  for (int i = 0; i < k; ++i) r *= u;
  double m = std::abs(r);
  return m == 0.0 ? C(0.0) : r / m;
}

/// y' = p(y) - a*x evaluated on (L,u) pairs; works at any magnitude.
inline void log_axpy(const Polynomial& p, C a, double Lin, C uin, double Lsub, C usub,
                     double& Lout, C& uout) {
  const auto& c = p.coeffs();
  int d = p.degree();
  double lead = std::abs(p.leading());
  if (uin != C(0.0) && Lin > kLogBig) {
    // asymptotic regime: every lower term underflows against c_d y^d
    Lout = double(d) * Lin + std::log(lead);
    uout = unit_of(p.leading()) * unit_pow(uin, d);
    return;
  }
  double M = kLogZero;
  struct Term {
    double e;
    C phase;
  };
  std::vector<Term> terms;
  terms.reserve(c.size() + 1);
  for (int i = 0; i <= d; ++i) {
    if (c[i] == C(0.0)) continue;
    if (i > 0 && uin == C(0.0)) continue;  // zero coordinate kills every power
    double e = std::log(std::abs(c[i])) + double(i) * Lin;
    terms.push_back({e, unit_of(c[i]) * unit_pow(uin, i)});
    M = std::max(M, e);
  }
  if (usub != C(0.0) && a != C(0.0)) {
    double e = std::log(std::abs(a)) + Lsub;
    terms.push_back({e, -unit_of(a) * usub});
    M = std::max(M, e);
  }
  if (terms.empty() || M == kLogZero) {
    Lout = kLogZero;
    uout = C(0.0);
    return;
  }
  C s(0.0);
  for (const Term& tm : terms) s += std::exp(tm.e - M) * tm.phase;
  double ms = std::abs(s);
  if (ms == 0.0) {
    Lout = kLogZero;
    uout = C(0.0);
    return;
  }
  Lout = M + std::log(ms);
  uout = s / ms;
}

inline void step_state(const HenonMap& map, Direction dir, CoordState& st) {
  if (!st.log_rep) {
    // fast path; bail to log representation before anything can overflow
    double m = norm_inf(st.z);
    if (m < kCartLimit) {
      bool ok = true;
      C2 w = st.z;
      const auto& fs = map.factors();
      if (dir == Direction::Forward) {
        for (const auto& f : fs) {
          w = f.forward(w);
          if (!finite(w) || norm_inf(w) >= kCartLimit) {
            ok = false;
            break;
          }
        }
      } else {
        for (std::size_t i = fs.size(); i-- > 0;) {
          w = fs[i].backward(w);
          if (!finite(w) || norm_inf(w) >= kCartLimit) {
            ok = false;
            break;
          }
        }
      }
      if (ok) {
        st.z = w;
        return;
      }
    }
    st.to_log();
  }
  const auto& fs = map.factors();
  if (dir == Direction::Forward) {
    for (const auto& f : fs) {
      double Ly2;
      C uy2;
      log_axpy(f.p, f.a, st.L[1], st.u[1], st.L[0], st.u[0], Ly2, uy2);
      st.L[0] = st.L[1];
      st.u[0] = st.u[1];
      st.L[1] = Ly2;
      st.u[1] = uy2;
    }
  } else {
    for (std::size_t i = fs.size(); i-- > 0;) {
      const auto& f = fs[i];
      double Lx2;
      C ux2;
      log_axpy(f.p, C(1.0), st.L[0], st.u[0], st.L[1], st.u[1], Lx2, ux2);
      // divide by a
      Lx2 -= std::log(std::abs(f.a));
      ux2 = ux2 == C(0.0) ? C(0.0) : ux2 * std::conj(unit_of(f.a));
      st.L[1] = st.L[0];
      st.u[1] = st.u[0];
      st.L[0] = Lx2;
      st.u[0] = ux2;
    }
  }
}

inline bool in_escape_region(const CoordState& st, Direction dir, double radius) {
  int grow = dir == Direction::Forward ? 1 : 0;
  int other = 1 - grow;
  if (st.log_rep) {
    return st.u[grow] != C(0.0) && st.L[grow] >= std::max(st.coord_log(other), std::log(radius));
  }
  double g = std::abs(st.z[grow]);
  return g >= radius && g >= std::abs(st.z[other]);
}

}  // namespace green_detail

namespace green_detail {

/// Shared evaluation core: tracks up to two (state, direction) components and
/// the log of the max-norm across them. Used with one component for G+/G-,
/// with two for the product map's Green function.
struct Tracker {
  const HenonMap* map;
  std::vector<std::pair<CoordState, Direction>> comps;
  double radius_fwd = 0.0, radius_bwd = 0.0;

  double log_norm() const {
    double m = kLogZero;
    for (const auto& c : comps) m = std::max(m, c.first.log_norm());
    return m;
  }
  bool escaped() const {
    for (const auto& c : comps) {
      double r = c.second == Direction::Forward ? radius_fwd : radius_bwd;
      if (in_escape_region(c.first, c.second, r)) return true;
    }
    return false;
  }
  void step() {
    for (auto& c : comps) step_state(*map, c.second, c.first);
  }
};

inline GreenResult evaluate(Tracker& tr, const GreenConfig& cfg, int deg, double kappa,
                            char side, double radius_for_bound) {
  GreenResult res;
  res.side = side;
  const double d = double(deg);
  int m = -1;
  double sum = 0.0;
  double prefix = 0.0;
  double Lprev = tr.log_norm();
  double dpow = 1.0;  // d^{-j} at the current j
  int j = 0;
  int zero_run = 0;
  const int hard_cap = cfg.n_max + cfg.tail_refinements + 64;
  while (j <= hard_cap) {
    if (m < 0 && tr.escaped()) {
      m = j;
      prefix = dpow * Lprev;  // d^{-m} log ||f^m z||
    }
    if (m >= 0 && (j - m >= cfg.tail_refinements || zero_run >= 3)) break;
    if (m < 0 && j >= cfg.n_max) break;
    tr.step();
    double Lcur = tr.log_norm();
    ++j;
    dpow /= d;
    if (m >= 0) {
      double inc = dpow * (Lcur - d * Lprev);
      sum += inc;
      zero_run = inc == 0.0 ? zero_run + 1 : 0;
    }
    Lprev = Lcur;
  }
  if (m >= 0) {
    res.escape_iter = m;
    res.value = std::max(0.0, prefix + sum);
    int measured = j - m;
    res.error_bound = kappa * std::pow(d, -double(m + measured)) / (d - 1.0);
  } else {
    res.value = 0.0;
    res.escape_iter = std::nullopt;
    res.error_bound =
        std::pow(d, -double(cfg.n_max)) * std::max(0.0, std::log(radius_for_bound * kappa));
  }
  return res;
}

inline void require_finite(const C2& z) {
  if (!finite(z)) throw std::invalid_argument("green: non-finite input point");
}

}  // namespace green_detail

inline GreenResult green_plus(const HenonMap& map, const C2& z, const GreenConfig& cfg = {}) {
  green_detail::require_finite(z);
  green_detail::Tracker tr;
  tr.map = &map;
  double r = cfg.escape_radius > 0.0 ? cfg.escape_radius : escape_radius(map);
  tr.radius_fwd = r;
  tr.radius_bwd = r;
  green_detail::CoordState st;
  st.z = z;
  tr.comps.push_back({st, Direction::Forward});
  return green_detail::evaluate(tr, cfg, map.degree(), tail_kappa(map, Direction::Forward), '+',
                                r);
}

inline GreenResult green_minus(const HenonMap& map, const C2& z, const GreenConfig& cfg = {}) {
  green_detail::require_finite(z);
  green_detail::Tracker tr;
  tr.map = &map;
  double r = cfg.escape_radius > 0.0 ? cfg.escape_radius : escape_radius_backward(map);
  tr.radius_fwd = r;
  tr.radius_bwd = r;
  green_detail::CoordState st;
  st.z = z;
  tr.comps.push_back({st, Direction::Backward});
  return green_detail::evaluate(tr, cfg, map.degree(), tail_kappa(map, Direction::Backward), '-',
                                r);
}

/// Green function of F by direct iteration of both components under the
/// max-norm; satisfies G_F(z,w) = max(G+(z), G-(w)) exactly, which the tests
/// check against this independent route.
inline GreenResult green_product(const ProductMap& F, const C2& z, const C2& w,
                                 const GreenConfig& cfg = {}) {
  green_detail::require_finite(z);
  green_detail::require_finite(w);
  const HenonMap& map = F.base();
  green_detail::Tracker tr;
  tr.map = &map;
  tr.radius_fwd = cfg.escape_radius > 0.0 ? cfg.escape_radius : escape_radius(map);
  tr.radius_bwd = cfg.escape_radius > 0.0 ? cfg.escape_radius : escape_radius_backward(map);
  green_detail::CoordState sz, sw;
  sz.z = z;
  sw.z = w;
  tr.comps.push_back({sz, Direction::Forward});
  tr.comps.push_back({sw, Direction::Backward});
  double kappa = std::max(tail_kappa(map, Direction::Forward),
                          tail_kappa(map, Direction::Backward));
  return green_detail::evaluate(tr, cfg, map.degree(), kappa, 'F',
                                std::max(tr.radius_fwd, tr.radius_bwd));
}

struct JuliaMembership {
  bool forward_bounded = false;
  bool backward_bounded = false;
};

/// Bounded-orbit test up to the configured horizon; both flags true places z
/// in K = K+ âˆ© K- as far as the horizon can tell.
inline JuliaMembership julia_membership(const HenonMap& map, const C2& z,
                                        const GreenConfig& cfg = {}) {
  JuliaMembership out;
  out.forward_bounded = !green_plus(map, z, cfg).escape_iter.has_value();
  out.backward_bounded = !green_minus(map, z, cfg).escape_iter.has_value();
  return out;
}

// ---------------------------------------------------------------------------
// Truncation-level potentials G^(n) = d^{-n} log+ ||f^{+-n} z|| and the
// Cauchy-rate scan of their successive differences.

namespace green_detail {

/// Log-norm sequence L_0..L_n of an orbit (L_j = log ||f^j z||, -inf as 0).
inline std::vector<double> log_norm_sequence(const HenonMap& map, Direction dir, const C2& z,
                                             int n) {
  CoordState st;
  st.z = z;
  std::vector<double> seq;
  seq.reserve(std::size_t(n) + 1);
  seq.push_back(st.log_norm());
  for (int j = 0; j < n; ++j) {
    step_state(map, dir, st);
    seq.push_back(st.log_norm());
  }
  return seq;
}

}  // namespace green_detail

/// d^{-n} log+ ||f^n z||, the raw truncation without tail refinement.
inline double green_truncation(const HenonMap& map, Direction dir, const C2& z, int n) {
  auto seq = green_detail::log_norm_sequence(map, dir, z, n);
  return std::pow(double(map.degree()), -double(n)) * std::max(0.0, seq.back());
}

struct ConvergenceRow {
  int n;
  double sup_diff;
};

/// sup over points of |G^(n+1) - G^(n)| for n in [n_lo, n_hi].
inline std::vector<ConvergenceRow> convergence_scan(const HenonMap& map,
                                                    const std::vector<C2>& points, int n_lo,
                                                    int n_hi, Direction dir = Direction::Forward) {
  if (points.empty()) throw std::invalid_argument("convergence_scan: empty point list");
  if (n_lo < 0 || n_hi < n_lo) throw std::invalid_argument("convergence_scan: bad n range");
  const double d = double(map.degree());
  std::vector<ConvergenceRow> rows;
  for (int n = n_lo; n <= n_hi; ++n) rows.push_back({n, 0.0});
  for (const C2& z : points) {
    auto seq = green_detail::log_norm_sequence(map, dir, z, n_hi + 1);
    double dpow = std::pow(d, -double(n_lo));
    for (int n = n_lo; n <= n_hi; ++n) {
      double gn = dpow * std::max(0.0, seq[std::size_t(n)]);
      double gn1 = dpow / d * std::max(0.0, seq[std::size_t(n) + 1]);
      rows[std::size_t(n - n_lo)].sup_diff =
          std::max(rows[std::size_t(n - n_lo)].sup_diff, std::abs(gn1 - gn));
      dpow /= d;
    }
  }
  return rows;
}

/// Double-double variant for real maps: points carried in dd through the
/// bounded phase so that shadowing survives past the double-precision wall.
inline std::vector<ConvergenceRow> convergence_scan_dd(const HenonMap& map,
                                                       const std::vector<std::array<DD, 2>>& points,
                                                       int n_lo, int n_hi) {
  if (!map.is_real()) throw std::invalid_argument("convergence_scan_dd: real maps only");
  if (points.empty()) throw std::invalid_argument("convergence_scan: empty point list");
  const double d = double(map.degree());
  const double r = escape_radius(map);
  std::vector<ConvergenceRow> rows;
  for (int n = n_lo; n <= n_hi; ++n) rows.push_back({n, 0.0});
  for (const auto& p : points) {
    std::vector<double> seq;
    seq.reserve(std::size_t(n_hi) + 2);
    std::array<DD, 2> z = p;
    bool logmode = false;
    green_detail::CoordState st;
    for (int j = 0; j <= n_hi + 1; ++j) {
      if (!logmode) {
        DD nx = abs(z[0]), ny = abs(z[1]);
        DD nn = nx > ny ? nx : ny;
        seq.push_back(nn.hi <= 0.0 ? green_detail::kLogZero
                                   : std::log(nn.hi) + nn.lo / nn.hi);
        bool esc = ny.hi >= std::max(nx.hi, r);
        if (esc || nn.hi >= 1e100) {
          st.z = {C(0.0), C(0.0)};
          st.log_rep = true;
          for (int i = 0; i < 2; ++i) {
            double m = abs(z[i]).hi;
            if (m == 0.0) {
              st.L[i] = green_detail::kLogZero;
              st.u[i] = C(0.0);
            } else {
              st.L[i] = std::log(std::abs(z[i].hi)) + z[i].lo / z[i].hi;
              st.u[i] = C(z[i].hi < 0.0 ? -1.0 : 1.0);
            }
          }
          logmode = true;
        } else if (j <= n_hi) {
          z = map.forward_real_dd(z);
        }
      } else {
        seq.push_back(st.log_norm());
      }
      if (logmode && j <= n_hi) green_detail::step_state(map, Direction::Forward, st);
    }
    double dpow = std::pow(d, -double(n_lo));
    for (int n = n_lo; n <= n_hi; ++n) {
      double gn = dpow * std::max(0.0, seq[std::size_t(n)]);
      double gn1 = dpow / d * std::max(0.0, seq[std::size_t(n) + 1]);
      rows[std::size_t(n - n_lo)].sup_diff =
          std::max(rows[std::size_t(n - n_lo)].sup_diff, std::abs(gn1 - gn));
      dpow /= d;
    }
  }
  return rows;
}

/// Least-squares slope of log(sup_diff) against n over rows with positive sup.
inline double fit_log_slope(const std::vector<ConvergenceRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (const auto& r : rows) {
    if (r.sup_diff <= 0.0) continue;
    double x = double(r.n), y = std::log(r.sup_diff);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  if (k < 2) throw std::runtime_error("fit_log_slope: fewer than two usable rows");
  double denom = double(k) * sxx - sx * sx;
  return (double(k) * sxy - sx * sy) / denom;
}

/// Seeds for the Cauchy-rate scan: points a controlled tiny distance from the
/// saddle fixed point of a real quadratic factor map, so their escape times
/// spread well past the horizon reachable from generic double-precision
/// starts. Offsets go down to ~1e-26, hence the dd carrier type.
inline std::vector<std::array<DD, 2>> late_escape_points(const HenonMap& map, int count,
                                                         std::uint64_t seed,
                                                         double log10_t_min = -26.0,
                                                         double log10_t_max = -4.0) {
  if (map.factors().size() != 1 || !map.is_real())
    throw std::invalid_argument("late_escape_points: single real factor expected");
  const auto& f = map.factors()[0];
  if (f.p.degree() != 2) throw std::invalid_argument("late_escape_points: quadratic factor expected");
  double c0 = f.p.coeffs()[0].real();
  double c1 = f.p.coeffs()[1].real();
  double c2 = f.p.leading().real();
  double a = f.a.real();
  // fixed point on the diagonal: c2 y^2 + (c1 - 1 - a) y + c0 = 0, larger root
  DD bq = DD(c1) - DD(1.0) - DD(a);
  DD disc = bq * bq - 4.0 * DD(c2) * DD(c0);
  if (disc.hi <= 0.0) throw std::runtime_error("late_escape_points: no real fixed point");
  DD y = (-bq + sqrt(disc)) / (2.0 * c2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::vector<std::array<DD, 2>> pts;
  pts.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i) {
    double frac = count == 1 ? 0.0 : double(i) / double(count - 1);
    double t = std::pow(10.0, log10_t_min + (log10_t_max - log10_t_min) * frac);
    double th = angle(rng);
    pts.push_back({y + DD(t * std::cos(th)), y + DD(t * std::sin(th))});
  }
  return pts;
}

}  // namespace henonlab
