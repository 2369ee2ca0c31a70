// SPDX-License-Identifier: Apache-2.0
// Observables as expression trees over (x, y) — or (x1, y1, x2, y2) on the
// product space — with exact structural first and second derivatives.
// Input syntax is parenthesized prefix notation:
//   expr := number | var | (op expr...)
//   op   := + | - | * | neg | ^ (integer power) | sin | cos | exp
// Examples: "x", "(* x y)", "(sin (+ x y))", "(^ x 2)".

#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace henonlab {

struct ObservableParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Observable {
 public:
  Observable() : node_(constant(0.0)) {}

  static Observable parse(const std::string& text, int arity = 2) {
    if (arity != 2 && arity != 4)
      throw std::invalid_argument("observable: arity must be 2 or 4");
    Parser p{text, 0, arity};
    NodePtr n = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ObservableParseError("trailing input at " + std::to_string(p.pos));
    return Observable(std::move(n), arity);
  }

  int arity() const { return arity_; }
  const std::string& source() const { return source_; }

  double operator()(const double* v) const { return eval(node_.get(), v); }
  double operator()(const std::array<double, 2>& v) const { return eval(node_.get(), v.data()); }
  double operator()(const std::array<double, 4>& v) const { return eval(node_.get(), v.data()); }

  /// Exact partial derivative, as a new tree.
  Observable derivative(int var) const {
    if (var < 0 || var >= arity_) throw std::invalid_argument("observable: bad variable index");
    return Observable(diff(node_.get(), var), arity_);
  }

 private:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  enum class Op { Const, Var, Add, Mul, Neg, Pow, Sin, Cos, Exp };

  struct Node {
    Op op;
    double value = 0.0;  // Const
    int index = 0;       // Var; exponent for Pow
    std::vector<NodePtr> kids;
  };

  Observable(NodePtr n, int arity) : node_(std::move(n)), arity_(arity) {
    source_ = render(node_.get(), arity_);
  }

  static NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }
  static NodePtr variable(int i) {
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->index = i;
    return n;
  }
  static NodePtr make(Op op, std::vector<NodePtr> kids, int index = 0) {
    // light folding keeps derivative trees small
    if (op == Op::Add) {
      std::vector<NodePtr> keep;
      double c = 0.0;
      for (auto& k : kids) {
        if (k->op == Op::Const)
          c += k->value;
        else
          keep.push_back(k);
      }
      if (c != 0.0 || keep.empty()) keep.push_back(constant(c));
      if (keep.size() == 1) return keep[0];
      kids = std::move(keep);
    }
    if (op == Op::Mul) {
      std::vector<NodePtr> keep;
      double c = 1.0;
      for (auto& k : kids) {
        if (k->op == Op::Const)
          c *= k->value;
        else
          keep.push_back(k);
      }
      if (c == 0.0) return constant(0.0);
      if (c != 1.0 || keep.empty()) keep.push_back(constant(c));
      if (keep.size() == 1) return keep[0];
      kids = std::move(keep);
    }
    if (op == Op::Neg && kids[0]->op == Op::Const) return constant(-kids[0]->value);
    if (op == Op::Pow) {
      if (index == 0) return constant(1.0);
      if (index == 1) return kids[0];
      if (kids[0]->op == Op::Const) return constant(std::pow(kids[0]->value, index));
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->kids = std::move(kids);
    n->index = index;
    return n;
  }

  static double eval(const Node* n, const double* v) {
    switch (n->op) {
      case Op::Const:
        return n->value;
      case Op::Var:
        return v[n->index];
      case Op::Add: {
        double s = 0.0;
        for (const auto& k : n->kids) s += eval(k.get(), v);
        return s;
      }
      case Op::Mul: {
        double s = 1.0;
        for (const auto& k : n->kids) s *= eval(k.get(), v);
        return s;
      }
      case Op::Neg:
        return -eval(n->kids[0].get(), v);
      case Op::Pow: {
        double b = eval(n->kids[0].get(), v);
        double r = 1.0;
        for (int i = 0; i < n->index; ++i) r *= b;
        return r;
      }
      case Op::Sin:
        return std::sin(eval(n->kids[0].get(), v));
      case Op::Cos:
        return std::cos(eval(n->kids[0].get(), v));
      case Op::Exp:
        return std::exp(eval(n->kids[0].get(), v));
    }
    return 0.0;
  }

  static NodePtr diff(const Node* n, int var) {
    switch (n->op) {
      case Op::Const:
        return constant(0.0);
      case Op::Var:
        return constant(n->index == var ? 1.0 : 0.0);
      case Op::Add: {
        std::vector<NodePtr> kids;
        for (const auto& k : n->kids) kids.push_back(diff(k.get(), var));
        return make(Op::Add, std::move(kids));
      }
      case Op::Mul: {
        std::vector<NodePtr> terms;
        for (std::size_t i = 0; i < n->kids.size(); ++i) {
          std::vector<NodePtr> fac;
          for (std::size_t j = 0; j < n->kids.size(); ++j)
            fac.push_back(i == j ? diff(n->kids[j].get(), var) : n->kids[j]);
          terms.push_back(make(Op::Mul, std::move(fac)));
        }
        return make(Op::Add, std::move(terms));
      }
      case Op::Neg:
        return make(Op::Neg, {diff(n->kids[0].get(), var)});
      case Op::Pow: {
        // d(b^k) = k b^{k-1} b'
        NodePtr b = n->kids[0];
        return make(Op::Mul, {constant(double(n->index)), make(Op::Pow, {b}, n->index - 1),
                              diff(b.get(), var)});
      }
      case Op::Sin:
        return make(Op::Mul, {make(Op::Cos, {n->kids[0]}), diff(n->kids[0].get(), var)});
      case Op::Cos:
        return make(Op::Neg,
                    {make(Op::Mul, {make(Op::Sin, {n->kids[0]}), diff(n->kids[0].get(), var)})});
      case Op::Exp: {
        auto e = std::make_shared<Node>();
        e->op = Op::Exp;
        e->kids = {n->kids[0]};
        return make(Op::Mul, {e, diff(n->kids[0].get(), var)});
      }
    }
    return constant(0.0);
  }

  static std::string render(const Node* n, int arity) {
    switch (n->op) {
      case Op::Const: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", n->value);
        return buf;
      }
      case Op::Var: {
        static const char* plane[] = {"x", "y"};
        static const char* prod[] = {"x1", "y1", "x2", "y2"};
        return arity == 2 ? plane[n->index] : prod[n->index];
      }
      case Op::Add:
      case Op::Mul: {
        std::string s = n->op == Op::Add ? "(+" : "(*";
        for (const auto& k : n->kids) s += " " + render(k.get(), arity);
        return s + ")";
      }
      case Op::Neg:
        return "(neg " + render(n->kids[0].get(), arity) + ")";
      case Op::Pow:
        return "(^ " + render(n->kids[0].get(), arity) + " " + std::to_string(n->index) + ")";
      case Op::Sin:
        return "(sin " + render(n->kids[0].get(), arity) + ")";
      case Op::Cos:
        return "(cos " + render(n->kids[0].get(), arity) + ")";
      case Op::Exp:
        return "(exp " + render(n->kids[0].get(), arity) + ")";
    }
    return "?";
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;
    int arity;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& what) {
      throw ObservableParseError(what + " at position " + std::to_string(pos));
    }

    std::string token() {
      skip_ws();
      std::size_t b = pos;
      while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
             s[pos] != '(' && s[pos] != ')')
        ++pos;
      if (b == pos) fail("expected token");
      return s.substr(b, pos - b);
    }

    int var_index(const std::string& t) {
      if (arity == 2) {
        if (t == "x") return 0;
        if (t == "y") return 1;
      } else {
        if (t == "x1") return 0;
        if (t == "y1") return 1;
        if (t == "x2") return 2;
        if (t == "y2") return 3;
      }
      return -1;
    }

    NodePtr parse_expr() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of input");
      if (s[pos] != '(') {
        std::string t = token();
        int vi = var_index(t);
        if (vi >= 0) return variable(vi);
        try {
          std::size_t used = 0;
          double v = std::stod(t, &used);
          if (used != t.size()) throw std::invalid_argument("");
          return constant(v);
        } catch (...) {
          fail("unknown token '" + t + "'");
        }
      }
      ++pos;  // '('
      std::string op = token();
      std::vector<NodePtr> kids;
      NodePtr result;
      if (op == "+" || op == "*") {
        while (true) {
          skip_ws();
          if (pos < s.size() && s[pos] == ')') break;
          kids.push_back(parse_expr());
        }
        if (kids.empty()) fail("operator needs arguments");
        result = make(op == "+" ? Op::Add : Op::Mul, std::move(kids));
      } else if (op == "-") {
        NodePtr a = parse_expr();
        NodePtr b = parse_expr();
        result = make(Op::Add, {a, make(Op::Neg, {b})});
      } else if (op == "neg") {
        result = make(Op::Neg, {parse_expr()});
      } else if (op == "^") {
        NodePtr b = parse_expr();
        std::string e = token();
        int k = 0;
        try {
          std::size_t used = 0;
          k = std::stoi(e, &used);
          if (used != e.size()) throw std::invalid_argument("");
        } catch (...) {
          fail("power wants an integer exponent");
        }
        if (k < 0) fail("negative exponents unsupported");
        result = make(Op::Pow, {b}, k);
      } else if (op == "sin" || op == "cos" || op == "exp") {
        Op o = op == "sin" ? Op::Sin : op == "cos" ? Op::Cos : Op::Exp;
        result = make(o, {parse_expr()});
      } else {
        fail("unknown operator '" + op + "'");
      }
      skip_ws();
      if (pos >= s.size() || s[pos] != ')') fail("expected ')'");
      ++pos;
      return result;
    }
  };

  NodePtr node_;
  int arity_ = 2;
  std::string source_;
};

/// C2 norm over a box: max over a sampling lattice of |phi|, the gradient
/// entries, and the Hessian entries, all from exact derivative trees.
inline double c2_norm(const Observable& phi, const std::array<double, 2>& lo,
                      const std::array<double, 2>& hi, int samples_per_dim = 64) {
  if (phi.arity() != 2) throw std::invalid_argument("c2_norm: plane observables only");
  Observable dx = phi.derivative(0), dy = phi.derivative(1);
  Observable dxx = dx.derivative(0), dxy = dx.derivative(1), dyy = dy.derivative(1);
  double m = 0.0;
  for (int i = 0; i < samples_per_dim; ++i)
    for (int j = 0; j < samples_per_dim; ++j) {
      std::array<double, 2> p{lo[0] + (hi[0] - lo[0]) * (i + 0.5) / samples_per_dim,
                              lo[1] + (hi[1] - lo[1]) * (j + 0.5) / samples_per_dim};
      m = std::max({m, std::abs(phi(p)), std::abs(dx(p)), std::abs(dy(p)), std::abs(dxx(p)),
                    std::abs(dxy(p)), std::abs(dyy(p))});
    }
  return m;
}

inline double sup_norm(const Observable& phi, const std::array<double, 2>& lo,
                       const std::array<double, 2>& hi, int samples_per_dim = 64) {
  double m = 0.0;
  for (int i = 0; i < samples_per_dim; ++i)
    for (int j = 0; j < samples_per_dim; ++j) {
      std::array<double, 2> p{lo[0] + (hi[0] - lo[0]) * (i + 0.5) / samples_per_dim,
                              lo[1] + (hi[1] - lo[1]) * (j + 0.5) / samples_per_dim};
      m = std::max(m, std::abs(phi(p)));
    }
  return m;
}

}  // namespace henonlab
