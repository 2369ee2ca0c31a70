// SPDX-License-Identifier: Apache-2.0
// Saddle periodic orbits of real horseshoe parameters, enumerated by cyclic
// binary code: anti-integrable seeding (y_j = +-sqrt(-c) according to the
// bit) followed by damped Newton on the cyclic orbit system. The uniform
// measure on all period-n points is exactly invariant and serves as an
// independent cross-check of the grid measure.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "henonlab/green.hpp"
#include "henonlab/map.hpp"
#include "henonlab/parallel.hpp"

namespace henonlab {

using R2 = std::array<double, 2>;

// --- symbolic codes ---------------------------------------------------------

/// Cyclic binary word stored as its lexicographically minimal rotation.
class SymbolCode {
 public:
  explicit SymbolCode(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw std::invalid_argument("symbol code: empty word");
    canonicalize();
  }

  static SymbolCode from_string(const std::string& s) {
    std::vector<std::uint8_t> b;
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("symbol code: expected 0/1");
      b.push_back(c == '1');
    }
    return SymbolCode(std::move(b));
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  int length() const { return int(bits_.size()); }

  /// Smallest rotation period: the length of the primitive block.
  int primitive_period() const {
    int n = length();
    for (int p = 1; p <= n; ++p) {
      if (n % p) continue;
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) ok = bits_[i] == bits_[std::size_t((i + p) % n)];
      if (ok) return p;
    }
    return n;
  }

  SymbolCode primitive() const {
    int p = primitive_period();
    return SymbolCode(std::vector<std::uint8_t>(bits_.begin(), bits_.begin() + p));
  }

  std::string str() const {
    std::string s;
    for (auto b : bits_) s += b ? '1' : '0';
    return s;
  }

  bool operator==(const SymbolCode& o) const { return bits_ == o.bits_; }
  bool operator<(const SymbolCode& o) const {
    if (bits_.size() != o.bits_.size()) return bits_.size() < o.bits_.size();
    return bits_ < o.bits_;
  }

 private:
  void canonicalize() {
    std::vector<std::uint8_t> best = bits_;
    std::vector<std::uint8_t> rot = bits_;
    for (std::size_t k = 1; k < bits_.size(); ++k) {
      std::rotate(rot.begin(), rot.begin() + 1, rot.end());
      if (rot < best) best = rot;
    }
    bits_ = best;
  }

  std::vector<std::uint8_t> bits_;
};

/// All canonical cyclic words of length n (binary necklaces).
inline std::vector<SymbolCode> necklaces(int n) {
  if (n < 1 || n > 30) throw std::invalid_argument("necklaces: length out of range");
  std::vector<SymbolCode> out;
  for (std::uint64_t w = 0; w < (std::uint64_t(1) << n); ++w) {
    // canonical iff no rotation is lexicographically smaller
    std::uint64_t mask = (std::uint64_t(1) << n) - 1;
    std::uint64_t best = w;
    std::uint64_t r = w;
    for (int k = 1; k < n; ++k) {
      r = ((r >> 1) | (r << (n - 1))) & mask;
      best = std::min(best, r);
    }
    if (best != w) continue;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) bits[std::size_t(i)] = (w >> (n - 1 - i)) & 1;  // msb first
    out.emplace_back(std::move(bits));
  }
  return out;
}

// --- sampler preconditions --------------------------------------------------

/// The sampler works on single-factor real maps (x,y) -> (y, y^2 + c - a x);
/// returns (c, a) after checking the shape.
inline std::pair<double, double> quadratic_family_params(const HenonMap& map) {
  if (map.factors().size() != 1) throw std::invalid_argument("sampler: single-factor maps only");
  const HenonFactor& f = map.factors()[0];
  if (!f.p.is_real() || f.a.imag() != 0.0)
    throw std::invalid_argument("sampler: real coefficients required");
  if (f.p.degree() != 2 || f.p.coeffs()[1] != C(0.0) || f.p.leading() != C(1.0))
    throw std::invalid_argument("sampler: factor must be y^2 + c - a x");
  return {f.p.coeffs()[0].real(), f.a.real()};
}

// --- horseshoe certificate ---------------------------------------------------

struct HorseshoeReport {
  bool certified = false;
  double strip_inner = 0.0;  // |y| range of the two solution strips
  double strip_outer = 0.0;
  double gap = 0.0;        // distance between the strips
  double expansion = 0.0;  // min |p'(y)| - |a| over the strips
  std::string message;
};

/// Heuristic strip certificate on a box [-b, b]^2: iterate the refinement
/// s <- sqrt(-c + (1+|a|) s) to its fixed point; the solution set of
/// p(y) - a x in box lies in |y| in [sqrt(-c-(1+|a|)s*), sqrt(-c+(1+|a|)s*)].
/// Certified when the strips are disjoint, inside the box, and expanding.
inline HorseshoeReport horseshoe_check(const HenonMap& map, double box_half) {
  auto [c, a] = quadratic_family_params(map);
  HorseshoeReport rep;
  if (box_half <= 0.0) throw std::invalid_argument("horseshoe_check: box must be positive");
  double s = box_half;
  for (int it = 0; it < 200; ++it) {
    double hi2 = -c + (1.0 + std::abs(a)) * s;
    if (hi2 <= 0.0) {
      rep.message = "image strip empty: no bounded dynamics in box";
      return rep;
    }
    double ns = std::min(box_half, std::sqrt(hi2));
    if (std::abs(ns - s) < 1e-14) {
      s = ns;
      break;
    }
    s = ns;
  }
  double lo2 = -c - (1.0 + std::abs(a)) * s;
  double hi2 = -c + (1.0 + std::abs(a)) * s;
  rep.strip_outer = std::sqrt(hi2);
  if (lo2 <= 0.0) {
    rep.message = "solution strips overlap (|c| too small for this box)";
    return rep;
  }
  rep.strip_inner = std::sqrt(lo2);
  rep.gap = 2.0 * rep.strip_inner;
  rep.expansion = 2.0 * rep.strip_inner - std::abs(a);
  if (rep.strip_outer > box_half) {
    rep.message = "strips leave the box";
    return rep;
  }
  if (rep.expansion <= 1.0) {
    rep.message = "insufficient expansion on the strips";
    return rep;
  }
  rep.certified = true;
  rep.message = "certified";
  return rep;
}

// --- anti-integrable seeding and Newton refinement ---------------------------

/// bit 1 -> y = +sqrt(-c), bit 0 -> y = -sqrt(-c); x_j = y_{j-1} cyclically.
inline std::vector<R2> seed_orbit(const SymbolCode& code, const HenonMap& map) {
  auto [c, a] = quadratic_family_params(map);
  (void)a;
  if (c >= 0.0) throw std::invalid_argument("seed_orbit: no anti-integrable seeds (c >= 0)");
  double root = std::sqrt(-c);
  const auto& bits = code.bits();
  int n = int(bits.size());
  std::vector<R2> pts(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double y = bits[std::size_t(j)] ? root : -root;
    double x = bits[std::size_t((j - 1 + n) % n)] ? root : -root;
    pts[std::size_t(j)] = {x, y};
  }
  return pts;
}

struct NewtonConfig {
  double tolerance = 1e-12;
  int max_iterations = 200;
  int max_halvings = 20;
};

struct PeriodicOrbit {
  std::vector<R2> points;
  SymbolCode code;
  double residual = 0.0;
  double multiplier_max = 0.0;
  double multiplier_min = 0.0;

  bool saddle() const { return multiplier_max > 1.0 && multiplier_min < 1.0; }
};

struct RefineFailure {
  enum class Kind { NoConvergence, CodeMismatch } kind;
  SymbolCode code;
  double last_residual;
  std::string message;
};

namespace sampler_detail {

/// Solve A x = b in place by Gaussian elimination with partial pivoting.
inline bool solve_dense(std::vector<double>& A, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(A[std::size_t(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(A[std::size_t(r) * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) return false;
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(A[std::size_t(piv) * n + k], A[std::size_t(col) * n + k]);
      std::swap(b[std::size_t(piv)], b[std::size_t(col)]);
    }
    double d = A[std::size_t(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      double f = A[std::size_t(r) * n + col] / d;
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) A[std::size_t(r) * n + k] -= f * A[std::size_t(col) * n + k];
      b[std::size_t(r)] -= f * b[std::size_t(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[std::size_t(r)];
    for (int k = r + 1; k < n; ++k) s -= A[std::size_t(r) * n + k] * b[std::size_t(k)];
    b[std::size_t(r)] = s / A[std::size_t(r) * n + r];
  }
  return true;
}

inline double cyclic_residual(const HenonMap& map, const std::vector<R2>& pts) {
  int n = int(pts.size());
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    R2 img = map.forward_real(pts[std::size_t(j)]);
    const R2& nxt = pts[std::size_t((j + 1) % n)];
    worst = std::max({worst, std::abs(img[0] - nxt[0]), std::abs(img[1] - nxt[1])});
  }
  return worst;
}

}  // namespace sampler_detail

/// Damped Newton on the 2n-dimensional cyclic system f(x_j) = x_{j+1 mod n}.
/// Multipliers come from the eigenvalues of the period-n Jacobian product.
inline std::optional<PeriodicOrbit> refine_orbit(const HenonMap& map, const SymbolCode& code,
                                                 std::vector<R2> pts, const NewtonConfig& cfg,
                                                 RefineFailure* failure = nullptr) {
  auto [c, a] = quadratic_family_params(map);
  (void)c;
  const int n = int(pts.size());
  const int dim = 2 * n;
  std::vector<double> J(std::size_t(dim) * dim);
  std::vector<double> rhs(static_cast<std::size_t>(dim));
  double res = sampler_detail::cyclic_residual(map, pts);
  auto fail = [&](RefineFailure::Kind kind, const std::string& msg) -> std::optional<PeriodicOrbit> {
    if (failure) *failure = {kind, code, res, msg};
    return std::nullopt;
  };

  for (int iter = 0; iter < cfg.max_iterations && res > cfg.tolerance; ++iter) {
    std::fill(J.begin(), J.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      const R2& z = pts[std::size_t(j)];
      R2 img = map.forward_real(z);
      const int jn = (j + 1) % n;
      rhs[std::size_t(2 * j)] = -(img[0] - pts[std::size_t(jn)][0]);
      rhs[std::size_t(2 * j + 1)] = -(img[1] - pts[std::size_t(jn)][1]);
      // d f / d(x_j, y_j) = [[0, 1], [-a, 2 y_j]]
      J[std::size_t(2 * j) * dim + 2 * j + 1] = 1.0;
      J[std::size_t(2 * j + 1) * dim + 2 * j] = -a;
      J[std::size_t(2 * j + 1) * dim + 2 * j + 1] = 2.0 * z[1];
      // -identity against (x_{j+1}, y_{j+1})
      J[std::size_t(2 * j) * dim + 2 * jn] -= 1.0;
      J[std::size_t(2 * j + 1) * dim + 2 * jn + 1] -= 1.0;
    }
    std::vector<double> A = J;
    std::vector<double> step = rhs;
    if (!sampler_detail::solve_dense(A, step, dim))
      return fail(RefineFailure::Kind::NoConvergence, "singular Newton system");

    double scale = 1.0;
    bool improved = false;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      std::vector<R2> trial = pts;
      for (int j = 0; j < n; ++j) {
        trial[std::size_t(j)][0] += scale * step[std::size_t(2 * j)];
        trial[std::size_t(j)][1] += scale * step[std::size_t(2 * j + 1)];
      }
      double tres = sampler_detail::cyclic_residual(map, trial);
      if (tres < res) {
        pts = std::move(trial);
        res = tres;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) return fail(RefineFailure::Kind::NoConvergence, "damping stalled");
  }
  if (res > cfg.tolerance) return fail(RefineFailure::Kind::NoConvergence, "iteration budget");

  // recomputed code must match the request (bit = sign of y); near-zero y
  // makes the symbol ambiguous and is treated as a mismatch
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (std::abs(pts[std::size_t(j)][1]) < 1e-6)
      return fail(RefineFailure::Kind::CodeMismatch, "ambiguous symbol: |y| ~ 0");
    bits[std::size_t(j)] = pts[std::size_t(j)][1] > 0.0;
  }
  if (!(SymbolCode(bits) == code)) return fail(RefineFailure::Kind::CodeMismatch, "code mismatch");

  PeriodicOrbit orbit{std::move(pts), code, res, 0.0, 0.0};
  // cycle product of the 2x2 Jacobians
  double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;
  for (const R2& z : orbit.points) {
    double f00 = 0.0, f01 = 1.0, f10 = -a, f11 = 2.0 * z[1];
    double n00 = f00 * m00 + f01 * m10;
    double n01 = f00 * m01 + f01 * m11;
    double n10 = f10 * m00 + f11 * m10;
    double n11 = f10 * m01 + f11 * m11;
    m00 = n00;
    m01 = n01;
    m10 = n10;
    m11 = n11;
  }
  double tr = m00 + m11;
  double det = m00 * m11 - m01 * m10;
  double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    double s = std::sqrt(disc);
    double l1 = 0.5 * (tr + s), l2 = 0.5 * (tr - s);
    orbit.multiplier_max = std::max(std::abs(l1), std::abs(l2));
    orbit.multiplier_min = std::min(std::abs(l1), std::abs(l2));
  } else {
    double mod = std::sqrt(std::abs(det));  // complex pair: equal moduli
    orbit.multiplier_max = orbit.multiplier_min = mod;
  }
  return orbit;
}

inline std::optional<PeriodicOrbit> refine_orbit(const HenonMap& map, const SymbolCode& code,
                                                 const NewtonConfig& cfg = {},
                                                 RefineFailure* failure = nullptr) {
  return refine_orbit(map, code, seed_orbit(code, map), cfg, failure);
}

// --- ensembles ---------------------------------------------------------------

struct PeriodicEnsemble {
  int period = 0;
  std::vector<PeriodicOrbit> orbits;  // primitive orbits, period dividing n
  std::vector<RefineFailure> failures;
  bool complete = false;

  /// Fixed points of f^n carried by the ensemble (2^n when complete).
  std::size_t total_points() const {
    std::size_t t = 0;
    for (const auto& o : orbits) t += o.points.size();
    return t;
  }
};

/// All orbits through period-n points: one Newton run per binary necklace of
/// length n (refined at its primitive period). Complete when the point count
/// reaches 2^n.
inline PeriodicEnsemble enumerate_periodic(const HenonMap& map, int n,
                                           const NewtonConfig& cfg = {},
                                           const ThreadPool& pool = ThreadPool(1),
                                           bool allow_uncertified = false) {
  if (n < 1) throw std::invalid_argument("enumerate_periodic: period must be >= 1");
  quadratic_family_params(map);
  if (!allow_uncertified) {
    HorseshoeReport rep = horseshoe_check(map, escape_radius(map));
    if (!rep.certified)
      throw std::runtime_error("enumerate_periodic: horseshoe not certified (" + rep.message +
                               "); pass allow_uncertified to override");
  }

  // one entry per necklace, refined at the primitive period
  std::vector<SymbolCode> reps;
  for (const SymbolCode& w : necklaces(n)) reps.push_back(w.primitive());

  PeriodicEnsemble ens;
  ens.period = n;
  std::vector<std::optional<PeriodicOrbit>> results(reps.size());
  std::vector<std::optional<RefineFailure>> fails(reps.size());
  pool.parallel_for(reps.size(), 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      RefineFailure f{RefineFailure::Kind::NoConvergence, reps[i], 0.0, ""};
      results[i] = refine_orbit(map, reps[i], cfg, &f);
      if (!results[i]) fails[i] = f;
    }
  });
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (results[i])
      ens.orbits.push_back(std::move(*results[i]));
    else
      ens.failures.push_back(std::move(*fails[i]));
  }
  std::sort(ens.orbits.begin(), ens.orbits.end(),
            [](const PeriodicOrbit& a, const PeriodicOrbit& b) { return a.code < b.code; });

  // distinct orbit points must not collide
  double min_sep = 1e300;
  std::vector<R2> all;
  for (const auto& o : ens.orbits)
    for (const auto& p : o.points) all.push_back(p);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      min_sep = std::min(min_sep, std::max(std::abs(all[i][0] - all[j][0]),
                                           std::abs(all[i][1] - all[j][1])));
  bool separated = all.size() < 2 || min_sep > 1e-8;

  ens.complete = ens.failures.empty() && separated &&
                 ens.total_points() == (std::size_t(1) << n);
  return ens;
}

}  // namespace henonlab
