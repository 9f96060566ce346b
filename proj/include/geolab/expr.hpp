#pragma once
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "geolab/errors.hpp"

namespace geolab::expr {

// Value with first and second derivative in t (truncated Taylor arithmetic).
// Enough to turn a profile expression phi into the induced curvature
// -w''/w with w = t*exp(phi) without finite differencing.
struct Jet2 {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
  Jet2() = default;
  Jet2(double v_, double d1_, double d2_) : v(v_), d1(d1_), d2(d2_) {}
  // constants
  Jet2(double c) : v(c) {}
  static Jet2 variable(double t) { return Jet2(t, 1.0, 0.0); }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
          a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet2 inv(const Jet2& a) {
  const double i = 1.0 / a.v;
  return {i, -a.d1 * i * i, (2.0 * a.d1 * a.d1 - a.v * a.d2) * i * i * i};
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }

// chain rule for h = u(f): h' = u'(f) f', h'' = u''(f) f'^2 + u'(f) f''
inline Jet2 lift(double u, double u1, double u2, const Jet2& f) {
  return {u, u1 * f.d1, u2 * f.d1 * f.d1 + u1 * f.d2};
}

inline Jet2 sin(const Jet2& f) { return lift(std::sin(f.v), std::cos(f.v), -std::sin(f.v), f); }
inline Jet2 cos(const Jet2& f) { return lift(std::cos(f.v), -std::sin(f.v), -std::cos(f.v), f); }
inline Jet2 sinh(const Jet2& f) { return lift(std::sinh(f.v), std::cosh(f.v), std::sinh(f.v), f); }
inline Jet2 cosh(const Jet2& f) { return lift(std::cosh(f.v), std::sinh(f.v), std::cosh(f.v), f); }
inline Jet2 tanh(const Jet2& f) {
  const double u = std::tanh(f.v), s = 1.0 - u * u;
  return lift(u, s, -2.0 * u * s, f);
}
inline Jet2 exp(const Jet2& f) {
  const double e = std::exp(f.v);
  return lift(e, e, e, f);
}
inline Jet2 log(const Jet2& f) {
  return lift(std::log(f.v), 1.0 / f.v, -1.0 / (f.v * f.v), f);
}
inline Jet2 pow(const Jet2& f, const Jet2& g) {
  if (g.d1 == 0.0 && g.d2 == 0.0) {
    const double p = g.v;
    const double u = std::pow(f.v, p);
    const double u1 = p * std::pow(f.v, p - 1.0);
    const double u2 = p * (p - 1.0) * std::pow(f.v, p - 2.0);
    return lift(u, u1, u2, f);
  }
  return exp(g * log(f));
}

namespace detail {
inline double pow(double a, double b) { return std::pow(a, b); }
inline Jet2 pow(const Jet2& a, const Jet2& b) { return geolab::expr::pow(a, b); }
}  // namespace detail

// Parsed arithmetic expression in the variable t.
// Grammar: + - * / ^ (right assoc), unary minus, parentheses, and the
// functions sin cos sinh cosh tanh exp log.
class Expr {
 public:
  static Expr parse(const std::string& text);

  double eval(double t) const { return eval_node<double>(root_, t); }
  Jet2 eval_jet(double t) const { return eval_node<Jet2>(root_, Jet2::variable(t)); }
  const std::string& text() const { return text_; }

 private:
  enum class Op { num, var, add, sub, mul, div, pw, neg, fsin, fcos, fsinh, fcosh, ftanh, fexp, flog };
  struct Node {
    Op op;
    double value = 0.0;
    int a = -1, b = -1;
  };
  std::vector<Node> nodes_;
  int root_ = -1;
  std::string text_;

  template <class T, class V>
  T eval_node(int idx, const V& t) const {
    const Node& n = nodes_[idx];
    switch (n.op) {
      case Op::num: return T(n.value);
      case Op::var: return T(t);
      case Op::add: return eval_node<T>(n.a, t) + eval_node<T>(n.b, t);
      case Op::sub: return eval_node<T>(n.a, t) - eval_node<T>(n.b, t);
      case Op::mul: return eval_node<T>(n.a, t) * eval_node<T>(n.b, t);
      case Op::div: return eval_node<T>(n.a, t) / eval_node<T>(n.b, t);
      case Op::pw:  return detail::pow(eval_node<T>(n.a, t), eval_node<T>(n.b, t));
      case Op::neg: return -eval_node<T>(n.a, t);
      case Op::fsin: { using std::sin; return sin(eval_node<T>(n.a, t)); }
      case Op::fcos: { using std::cos; return cos(eval_node<T>(n.a, t)); }
      case Op::fsinh: { using std::sinh; return sinh(eval_node<T>(n.a, t)); }
      case Op::fcosh: { using std::cosh; return cosh(eval_node<T>(n.a, t)); }
      case Op::ftanh: { using std::tanh; return tanh(eval_node<T>(n.a, t)); }
      case Op::fexp: { using std::exp; return exp(eval_node<T>(n.a, t)); }
      case Op::flog: { using std::log; return log(eval_node<T>(n.a, t)); }
    }
    throw config_error("corrupt expression tree");
  }

  // --- recursive descent parser ---
  struct Parser {
    const std::string& s;
    size_t pos = 0;
    Expr& out;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) { ++pos; return true; }
      return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
      throw config_error("expression error at position " + std::to_string(pos) +
                         " in \"" + s + "\": " + msg);
    }
    int mk(Op op, int a = -1, int b = -1, double v = 0.0) {
      out.nodes_.push_back({op, v, a, b});
      return static_cast<int>(out.nodes_.size()) - 1;
    }

    int parse_expr() {
      int lhs = parse_term();
      for (;;) {
        skip();
        if (eat('+')) lhs = mk(Op::add, lhs, parse_term());
        else if (eat('-')) lhs = mk(Op::sub, lhs, parse_term());
        else return lhs;
      }
    }
    int parse_term() {
      int lhs = parse_unary();
      for (;;) {
        skip();
        if (eat('*')) lhs = mk(Op::mul, lhs, parse_unary());
        else if (eat('/')) lhs = mk(Op::div, lhs, parse_unary());
        else return lhs;
      }
    }
    // '-' binds looser than '^': -t^2 == -(t^2)
    int parse_unary() {
      skip();
      if (eat('-')) return mk(Op::neg, parse_unary());
      return parse_power();
    }
    int parse_power() {
      int base = parse_primary();
      skip();
      if (eat('^')) return mk(Op::pw, base, parse_unary());
      return base;
    }
    int parse_primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        size_t used = 0;
        double v;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("bad number");
        }
        pos += used;
        return mk(Op::num, -1, -1, v);
      }
      if (c == '(') {
        ++pos;
        int e = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return e;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        size_t q = pos;
        while (q < s.size() && std::isalpha(static_cast<unsigned char>(s[q]))) ++q;
        const std::string name = s.substr(pos, q - pos);
        pos = q;
        if (name == "t") return mk(Op::var);
        Op op;
        if (name == "sin") op = Op::fsin;
        else if (name == "cos") op = Op::fcos;
        else if (name == "sinh") op = Op::fsinh;
        else if (name == "cosh") op = Op::fcosh;
        else if (name == "tanh") op = Op::ftanh;
        else if (name == "exp") op = Op::fexp;
        else if (name == "log") op = Op::flog;
        else fail("unknown identifier '" + name + "'");
        if (!eat('(')) fail("expected '(' after " + name);
        int arg = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return mk(op, arg);
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };
};

inline Expr Expr::parse(const std::string& text) {
  Expr e;
  e.text_ = text;
  Parser p{text, 0, e};
  e.root_ = p.parse_expr();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return e;
}

}  // namespace geolab::expr
