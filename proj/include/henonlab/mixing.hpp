// SPDX-License-Identifier: Apache-2.0
// Correlation series C_n = <(phi o f^n) psi> - <phi><psi> against a discrete
// measure, jackknife error bars, exponential-decay fits, and the checks of
// the d^{-n/2} mixing bound, including the product-measure identity.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "henonlab/map.hpp"
#include "henonlab/measure.hpp"
#include "henonlab/observable.hpp"
#include "henonlab/parallel.hpp"

namespace henonlab {

struct CorrelationEntry {
  int n = 0;
  double value = 0.0;
  double std_error = 0.0;
};

struct CorrelationSeries {
  std::vector<CorrelationEntry> entries;
  std::string measure_descriptor;
  std::string phi_descriptor;
  std::string psi_descriptor;
  double phi_c2 = 0.0;  // filled by callers that computed norms
  double psi_c2 = 0.0;
  std::size_t flagged_atoms = 0;  // escaped under iteration (non-invariant measures)
};

namespace mixing_detail {

constexpr int kJackknifeBlocks = 32;
constexpr double kOrbitCap = 1e9;

/// phi(f^n(atom)) for n = 0..n_max, one orbit pass per atom. For measures
/// with exact cycles the orbit is the index walk; otherwise numeric
/// iteration, with atoms that blow past kOrbitCap flagged and excluded.
struct AtomTable {
  std::vector<std::vector<double>> phi_shift;  // [n][atom]
  std::vector<double> psi0;
  std::vector<double> weight;  // renormalized over included atoms
  std::size_t flagged = 0;
};

inline AtomTable build_table(const DiscreteMeasure& m, const HenonMap& map, const Observable& phi,
                             const Observable& psi, int n_max) {
  AtomTable t;
  std::size_t n_atoms = m.size();
  std::vector<char> ok(n_atoms, 1);
  t.phi_shift.assign(std::size_t(n_max) + 1, std::vector<double>(n_atoms, 0.0));
  t.psi0.resize(n_atoms);
  for (std::size_t i = 0; i < n_atoms; ++i) t.psi0[i] = observe(psi, m.atoms[i]);

  if (m.exact_cycles()) {
    for (std::size_t i = 0; i < n_atoms; ++i) {
      std::int32_t j = std::int32_t(i);
      for (int n = 0; n <= n_max; ++n) {
        t.phi_shift[std::size_t(n)][i] = observe(phi, m.atoms[std::size_t(j)]);
        j = m.next[std::size_t(j)];
      }
    }
  } else {
    for (std::size_t i = 0; i < n_atoms; ++i) {
      C2 z{C(m.atoms[i][0], m.atoms[i][1]), C(m.atoms[i][2], m.atoms[i][3])};
      for (int n = 0; n <= n_max; ++n) {
        if (!finite(z) || norm_inf(z) > kOrbitCap) {
          ok[i] = 0;
          break;
        }
        t.phi_shift[std::size_t(n)][i] =
            phi(std::array<double, 2>{z[0].real(), z[1].real()});
        if (n < n_max) {
          try {
            z = map.forward(z);
          } catch (const EscapedToInfinity&) {
            ok[i] = 0;
            break;
          }
        }
      }
    }
  }

  t.weight.resize(n_atoms);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n_atoms; ++i) {
    if (!ok[i]) {
      ++t.flagged;
      continue;
    }
    wsum += m.weight[i];
  }
  if (!(wsum > 0.0)) throw std::runtime_error("correlation: every atom escaped");
  for (std::size_t i = 0; i < n_atoms; ++i) t.weight[i] = ok[i] ? m.weight[i] / wsum : 0.0;
  return t;
}

struct BlockSums {
  double w = 0.0, phi = 0.0, psi = 0.0, phipsi = 0.0;
};

inline std::vector<BlockSums> block_sums(const AtomTable& t, int n) {
  std::size_t n_atoms = t.weight.size();
  std::vector<BlockSums> blocks(kJackknifeBlocks);
  const auto& phin = t.phi_shift[std::size_t(n)];
  for (int b = 0; b < kJackknifeBlocks; ++b) {
    std::size_t lo = n_atoms * std::size_t(b) / kJackknifeBlocks;
    std::size_t hi = n_atoms * std::size_t(b + 1) / kJackknifeBlocks;
    std::vector<double> tw, tphi, tpsi, tpp;
    tw.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      tw.push_back(t.weight[i]);
      tphi.push_back(t.weight[i] * phin[i]);
      tpsi.push_back(t.weight[i] * t.psi0[i]);
      tpp.push_back(t.weight[i] * phin[i] * t.psi0[i]);
    }
    blocks[std::size_t(b)] = {pairwise_sum(tw), pairwise_sum(tphi), pairwise_sum(tpsi),
                              pairwise_sum(tpp)};
  }
  return blocks;
}

inline CorrelationEntry entry_from_blocks(const std::vector<BlockSums>& blocks, int n) {
  BlockSums tot;
  for (const auto& b : blocks) {
    tot.w += b.w;
    tot.phi += b.phi;
    tot.psi += b.psi;
    tot.phipsi += b.phipsi;
  }
  CorrelationEntry e;
  e.n = n;
  e.value = tot.phipsi / tot.w - (tot.phi / tot.w) * (tot.psi / tot.w);
  // delete-one-block jackknife
  const int B = kJackknifeBlocks;
  std::vector<double> reps;
  reps.reserve(std::size_t(B));
  for (const auto& b : blocks) {
    double w = tot.w - b.w;
    if (!(w > 0.0)) continue;
    double pp = (tot.phipsi - b.phipsi) / w;
    double p1 = (tot.phi - b.phi) / w;
    double p2 = (tot.psi - b.psi) / w;
    reps.push_back(pp - p1 * p2);
  }
  double mean = 0.0;
  for (double r : reps) mean += r;
  mean /= double(reps.size());
  double ss = 0.0;
  for (double r : reps) ss += (r - mean) * (r - mean);
  e.std_error = std::sqrt(ss * double(reps.size() - 1) / double(reps.size()));
  return e;
}

}  // namespace mixing_detail

inline CorrelationEntry correlation(const DiscreteMeasure& m, const HenonMap& map,
                                    const Observable& phi, const Observable& psi, int n,
                                    std::size_t* flagged = nullptr) {
  if (n < 0) throw std::invalid_argument("correlation: n must be >= 0");
  auto table = mixing_detail::build_table(m, map, phi, psi, n);
  if (flagged) *flagged = table.flagged;
  return mixing_detail::entry_from_blocks(mixing_detail::block_sums(table, n), n);
}

inline CorrelationSeries correlation_series(const DiscreteMeasure& m, const HenonMap& map,
                                            const Observable& phi, const Observable& psi,
                                            int n_max) {
  if (n_max < 0) throw std::invalid_argument("correlation_series: n_max must be >= 0");
  auto table = mixing_detail::build_table(m, map, phi, psi, n_max);
  CorrelationSeries s;
  s.measure_descriptor = m.descriptor;
  s.phi_descriptor = phi.source();
  s.psi_descriptor = psi.source();
  s.flagged_atoms = table.flagged;
  for (int n = 0; n <= n_max; ++n)
    s.entries.push_back(
        mixing_detail::entry_from_blocks(mixing_detail::block_sums(table, n), n));
  return s;
}

/// Entries before |C_n| first drops to the noise floor (3x jackknife error).
inline std::size_t usable_window(const CorrelationSeries& s, double floor_mult = 3.0) {
  std::size_t w = 0;
  for (const auto& e : s.entries) {
    if (std::abs(e.value) <= floor_mult * e.std_error) break;
    ++w;
  }
  return w;
}

struct DecayFit {
  double rate = 0.0;       // fitted per-step factor rho in (0, 1]
  double intercept = 0.0;  // log|C_0| of the fit
  int window_lo = 0;
  int window_hi = 0;  // inclusive
  double residual_norm = 0.0;
};

struct InsufficientSignal {
  std::size_t qualifying;
};

/// Least squares of log|C_n| against n over the usable window.
inline std::optional<DecayFit> fit_decay(const CorrelationSeries& s,
                                         InsufficientSignal* why = nullptr,
                                         double floor_mult = 3.0) {
  std::size_t w = usable_window(s, floor_mult);
  std::size_t count = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < w; ++i) {
    double v = std::abs(s.entries[i].value);
    if (v <= 0.0) continue;
    double x = double(s.entries[i].n), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 4) {
    if (why) *why = {count};
    return std::nullopt;
  }
  double denom = double(count) * sxx - sx * sx;
  double slope = (double(count) * sxy - sx * sy) / denom;
  double inter = (sy - slope * sx) / double(count);
  DecayFit fit;
  fit.rate = std::exp(slope);
  fit.intercept = inter;
  fit.window_lo = s.entries.front().n;
  fit.window_hi = s.entries[w - 1].n;
  double ss = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    double v = std::abs(s.entries[i].value);
    if (v <= 0.0) continue;
    double r = std::log(v) - (inter + slope * double(s.entries[i].n));
    ss += r * r;
  }
  fit.residual_norm = std::sqrt(ss);
  return fit;
}

struct BoundCheckReport {
  std::vector<double> r;  // r_n = |C_n| d^{n/2} / (|phi|_C2 |psi|_C2), usable window
  double sup_r = 0.0;
  double early_max = 0.0;  // max over n <= 3 within the window
  bool pass = false;       // sup_r <= 2 * early_max (upper-bound shape)
  std::size_t window = 0;
};

/// The d^{-n/2} bound check: the normalized sequence r_n must stay within a
/// factor 2 of its early maximum on the usable window. Faster-than-bound
/// decay passes; only growth of r_n fails.
inline BoundCheckReport theorem_bound_check(const CorrelationSeries& s, int degree,
                                            double phi_norm, double psi_norm,
                                            double floor_mult = 3.0) {
  if (!(phi_norm > 0.0) || !(psi_norm > 0.0))
    throw std::invalid_argument("theorem_bound_check: norms must be positive");
  BoundCheckReport rep;
  rep.window = usable_window(s, floor_mult);
  for (std::size_t i = 0; i < rep.window; ++i) {
    const auto& e = s.entries[i];
    double rn = std::abs(e.value) * std::pow(double(degree), 0.5 * double(e.n)) /
                (phi_norm * psi_norm);
    rep.r.push_back(rn);
    rep.sup_r = std::max(rep.sup_r, rn);
    if (e.n <= 3) rep.early_max = std::max(rep.early_max, rn);
  }
  rep.pass = rep.r.empty() || rep.sup_r <= 2.0 * rep.early_max;
  return rep;
}

// --- product measure ---------------------------------------------------------

/// phi(x,y) lifted to the z- or w-slot of the product space.
inline Observable lift_to_product(const Observable& phi, int slot) {
  if (phi.arity() != 2) throw std::invalid_argument("lift_to_product: plane observable expected");
  std::string src = phi.source();
  std::string out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    char ch = src[i];
    bool boundary_before = i == 0 || src[i - 1] == ' ' || src[i - 1] == '(';
    bool boundary_after = i + 1 == src.size() || src[i + 1] == ' ' || src[i + 1] == ')';
    if (boundary_before && boundary_after && (ch == 'x' || ch == 'y')) {
      out += ch;
      out += slot == 0 ? '1' : '2';
    } else {
      out += ch;
    }
  }
  return Observable::parse(out, 4);
}

struct ProductMeasureReport {
  double factored = 0.0;  // <A, phi> * <A, psi>
  double paired = 0.0;    // <A x B, phi(z) psi(w)> by explicit double loop
  double gap = 0.0;
};

/// Compares <mu, phi><mu, psi> against the pairing of mu x mu with the
/// product-space observable phi(z) psi(w), the two sides of the
/// product-measure identity. A and B may be different approximations of mu.
inline ProductMeasureReport product_measure_check(const DiscreteMeasure& A,
                                                  const DiscreteMeasure& B, const Observable& phi,
                                                  const Observable& psi,
                                                  const ThreadPool& pool = ThreadPool(1)) {
  Observable phi_hat = lift_to_product(phi, 0);
  Observable psi_hat = lift_to_product(psi, 1);
  ProductMeasureReport rep;
  rep.factored = measure_mean(A, phi) * measure_mean(A, psi);

  // explicit pairing over the product atom set (row chunks deterministic)
  std::vector<double> psi_b(B.size());
  for (std::size_t j = 0; j < B.size(); ++j) {
    std::array<double, 4> q{0.0, 0.0, B.atoms[j][0], B.atoms[j][2]};
    psi_b[j] = psi_hat(q);
  }
  rep.paired = parallel_map_reduce<double>(
      pool, A.size(), 64,
      [&](std::size_t lo, std::size_t hi) {
        std::vector<double> rows;
        rows.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
          std::array<double, 4> q{A.atoms[i][0], A.atoms[i][2], 0.0, 0.0};
          double phi_i = phi_hat(q);
          std::vector<double> terms(B.size());
          for (std::size_t j = 0; j < B.size(); ++j)
            terms[j] = B.weight[j] * phi_i * psi_b[j];
          rows.push_back(A.weight[i] * pairwise_sum(terms));
        }
        return pairwise_sum(rows);
      },
      [](double a, double b) { return a + b; });
  rep.gap = std::abs(rep.factored - rep.paired);
  return rep;
}

}  // namespace henonlab
