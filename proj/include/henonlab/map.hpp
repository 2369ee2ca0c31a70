// SPDX-License-Identifier: Apache-2.0
// Generalized Henon automorphisms of C^2 as compositions of elementary
// factors (x,y) -> (y, p(y) - a*x). Every dynamically nontrivial polynomial
// automorphism of C^2 is conjugate to such a composition, so this normal
// form is the only map algebra the library needs.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "henonlab/dd.hpp"
#include "henonlab/polynomial.hpp"

namespace henonlab {

using C2 = std::array<C, 2>;

enum class Direction { Forward, Backward };
enum class Sign { Plus, Minus };

/// Thrown by plain-arithmetic evaluation when an iterate leaves the range of
/// double precision; carries the factor index that overflowed.
struct EscapedToInfinity : std::runtime_error {
  explicit EscapedToInfinity(int factor_index)
      : std::runtime_error("escaped-to-infinity at factor " + std::to_string(factor_index)),
        factor(factor_index) {}
  int factor;
};

struct HenonFactor {
  Polynomial p;  // degree >= 2
  C a;           // nonzero; Jacobian determinant of the factor

  HenonFactor(Polynomial poly, C mult) : p(std::move(poly)), a(mult) {
    if (p.degree() < 2) throw std::invalid_argument("henon factor: deg p must be >= 2");
    if (a == C(0.0)) throw std::invalid_argument("henon factor: a must be nonzero");
  }

  C2 forward(const C2& z) const { return {z[1], p(z[1]) - a * z[0]}; }
  C2 backward(const C2& z) const { return {(p(z[0]) - z[1]) / a, z[0]}; }
};

inline bool finite(const C2& z) {
  return std::isfinite(z[0].real()) && std::isfinite(z[0].imag()) &&
         std::isfinite(z[1].real()) && std::isfinite(z[1].imag());
}

inline double norm_inf(const C2& z) { return std::max(std::abs(z[0]), std::abs(z[1])); }

class HenonMap {
 public:
  explicit HenonMap(std::vector<HenonFactor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("henon map: needs at least one factor");
    degree_ = 1;
    jacobian_ = C(1.0);
    for (const auto& f : factors_) {
      degree_ *= f.p.degree();
      jacobian_ *= f.a;
    }
  }

  const std::vector<HenonFactor>& factors() const { return factors_; }

  /// Algebraic degree d+ = prod deg(p_j). Equal to the degree d- of the
  /// inverse: this is the k = 2s case, where the two degrees coincide.
  int degree() const { return degree_; }

  /// Constant Jacobian determinant prod a_j.
  C jacobian_det() const { return jacobian_; }

  C2 forward(const C2& z) const {
    C2 w = z;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      w = factors_[i].forward(w);
      if (!finite(w)) throw EscapedToInfinity(static_cast<int>(i));
    }
    return w;
  }

  C2 backward(const C2& z) const {
    C2 w = z;
    for (std::size_t i = factors_.size(); i-- > 0;) {
      w = factors_[i].backward(w);
      if (!finite(w)) throw EscapedToInfinity(static_cast<int>(i));
    }
    return w;
  }

  C2 forward_n(C2 z, int n) const {
    for (int i = 0; i < n; ++i) z = forward(z);
    return z;
  }
  C2 backward_n(C2 z, int n) const {
    for (int i = 0; i < n; ++i) z = backward(z);
    return z;
  }

  bool is_real() const {
    for (const auto& f : factors_)
      if (!f.p.is_real() || f.a.imag() != 0.0) return false;
    return true;
  }

  /// Real-plane step in double-double arithmetic (real maps only).
  std::array<DD, 2> forward_real_dd(const std::array<DD, 2>& z) const {
    std::array<DD, 2> w = z;
    for (const auto& f : factors_) {
      DD py = f.p.eval_dd(w[1]);
      w = {w[1], py - DD(f.a.real()) * w[0]};
    }
    return w;
  }

  std::array<double, 2> forward_real(const std::array<double, 2>& z) const {
    std::array<double, 2> w = z;
    for (const auto& f : factors_) w = {w[1], f.p.eval_real(w[1]) - f.a.real() * w[0]};
    return w;
  }

 private:
  std::vector<HenonFactor> factors_;
  int degree_;
  C jacobian_;
};

inline int degree(const HenonMap& m) { return m.degree(); }
inline C jacobian_det(const HenonMap& m) { return m.jacobian_det(); }
inline C2 eval_forward(const HenonMap& m, const C2& z) { return m.forward(z); }
inline C2 eval_backward(const HenonMap& m, const C2& z) { return m.backward(z); }

/// F(z,w) = (f(z), f^{-1}(w)) on C^2 x C^2. Regular with 1-dimensional
/// indeterminacy sets at infinity; degree of F equals the base degree.
class ProductMap {
 public:
  explicit ProductMap(HenonMap base) : base_(std::move(base)) {}

  const HenonMap& base() const { return base_; }
  int degree() const { return base_.degree(); }

  std::array<C2, 2> forward(const std::array<C2, 2>& q) const {
    return {base_.forward(q[0]), base_.backward(q[1])};
  }
  std::array<C2, 2> backward(const std::array<C2, 2>& q) const {
    return {base_.backward(q[0]), base_.forward(q[1])};
  }

 private:
  HenonMap base_;
};

inline ProductMap build_product(const HenonMap& m) { return ProductMap(m); }

}  // namespace henonlab
