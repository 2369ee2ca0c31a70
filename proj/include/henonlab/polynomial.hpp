// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "henonlab/dd.hpp"

namespace henonlab {

using C = std::complex<double>;

/// Dense univariate polynomial over C, constant term first.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<C> coeffs) : c_(coeffs) { trim(); }
  explicit Polynomial(std::vector<C> coeffs) : c_(std::move(coeffs)) { trim(); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<C>& coeffs() const { return c_; }
  C leading() const { return c_.back(); }

  C operator()(C y) const {
    C acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * y + *it;
    return acc;
  }

  double eval_real(double y) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * y + it->real();
    return acc;
  }

  DD eval_dd(DD y) const {
    DD acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * y + DD(it->real());
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial{std::vector<C>{C(0.0)}};
    std::vector<C> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * C(double(i));
    return Polynomial{std::move(d)};
  }

  bool is_real() const {
    for (const C& v : c_)
      if (v.imag() != 0.0) return false;
    return true;
  }

  /// Sum of |c_i| over i < degree; enters the escape-radius rule.
  double lower_abs_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < c_.size(); ++i) s += std::abs(c_[i]);
    return s;
  }

 private:
  void trim() {
    if (c_.empty()) throw std::invalid_argument("polynomial: no coefficients");
    while (c_.size() > 1 && c_.back() == C(0.0)) c_.pop_back();
    if (c_.back() == C(0.0)) throw std::invalid_argument("polynomial: zero polynomial");
  }

  std::vector<C> c_;
};

}  // namespace henonlab
