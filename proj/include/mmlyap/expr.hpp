#pragma once

#include "mmlyap/numkernel.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mmlyap {

/// Immutable scalar expression over the state variables x1..xn.
///
/// Nodes are shared, so copying an Expr is cheap and safe across threads.
class Expr {
 public:
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Atan, Sqrt, QuadForm };

  Expr();  // the constant 0

  static Expr constant(double v);
  static Expr var(int index);  // 0-based
  static Expr quadform(const SymMatrix& p);
  static Expr power(const Expr& base, int exponent);
  static Expr sin(const Expr& a);
  static Expr cos(const Expr& a);
  static Expr atan(const Expr& a);
  static Expr sqrt(const Expr& a);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  Kind kind() const;
  bool is_constant(double v) const;

  /// Value at x. Throws DomainError naming the offending subexpression.
  double eval(const Vec& x) const;

  /// Exact partial derivative with respect to x_{var+1}.
  Expr differentiate(int var) const;

  /// Highest variable index referenced plus one (0 for closed constants).
  int arity() const;

  /// Canonical text that parse_expr reads back to an identical tree.
  std::string str() const;

  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const Node> node_;
};

/// Gradient as n expressions.
std::vector<Expr> gradient(const Expr& e, int n);

/// Parses a standalone expression (state variables x1..xn, no named constants).
Expr parse_expr(const std::string& text, int n);

/// Shortest decimal text that reads back to exactly the same double.
std::string format_double(double v);

}  // namespace mmlyap
