#include "mmlyap/expr.hpp"

#include "lexer.hpp"
#include "mmlyap/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace mmlyap {

struct Expr::Node {
  Kind kind = Kind::Const;
  double value = 0.0;
  int index = 0;  // variable index or integer exponent
  std::shared_ptr<const Node> a, b;
  std::shared_ptr<const SymMatrix> p;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Const;
  n->value = v;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->kind == Expr::Kind::Const && n->value == v; }

std::string matrix_str(const SymMatrix& p) {
  std::string s = "[";
  for (int i = 0; i < p.dim(); ++i) {
    s += i ? ",[" : "[";
    for (int j = 0; j < p.dim(); ++j) {
      if (j) s += ",";
      s += format_double(p(i, j));
    }
    s += "]";
  }
  return s + "]";
}

std::string node_str(const NodePtr& n) {
  using K = Expr::Kind;
  switch (n->kind) {
    case K::Const:
      return n->value < 0 ? "(" + format_double(n->value) + ")" : format_double(n->value);
    case K::Var:
      return "x" + std::to_string(n->index + 1);
    case K::Add:
      return "(" + node_str(n->a) + " + " + node_str(n->b) + ")";
    case K::Sub:
      return "(" + node_str(n->a) + " - " + node_str(n->b) + ")";
    case K::Mul:
      return "(" + node_str(n->a) + " * " + node_str(n->b) + ")";
    case K::Div:
      return "(" + node_str(n->a) + " / " + node_str(n->b) + ")";
    case K::Neg:
      return "(-" + node_str(n->a) + ")";
    case K::Pow:
      return "pow(" + node_str(n->a) + ", " + std::to_string(n->index) + ")";
    case K::Sin:
      return "sin(" + node_str(n->a) + ")";
    case K::Cos:
      return "cos(" + node_str(n->a) + ")";
    case K::Atan:
      return "atan(" + node_str(n->a) + ")";
    case K::Sqrt:
      return "sqrt(" + node_str(n->a) + ")";
    case K::QuadForm:
      return "quadform(" + matrix_str(*n->p) + ")";
  }
  return "?";
}

double node_eval(const NodePtr& n, const Vec& x) {
  using K = Expr::Kind;
  switch (n->kind) {
    case K::Const:
      return n->value;
    case K::Var:
      if (n->index >= x.size()) throw InvalidInput("expression references x" + std::to_string(n->index + 1) +
                                                   " but the state has dimension " + std::to_string(x.size()));
      return x[n->index];
    case K::Add:
      return node_eval(n->a, x) + node_eval(n->b, x);
    case K::Sub:
      return node_eval(n->a, x) - node_eval(n->b, x);
    case K::Mul:
      return node_eval(n->a, x) * node_eval(n->b, x);
    case K::Div: {
      const double d = node_eval(n->b, x);
      if (d == 0.0) throw DomainError("division by zero", node_str(n));
      return node_eval(n->a, x) / d;
    }
    case K::Neg:
      return -node_eval(n->a, x);
    case K::Pow: {
      const double b = node_eval(n->a, x);
      if (b == 0.0 && n->index < 0) throw DomainError("zero to a negative power", node_str(n));
      return std::pow(b, n->index);
    }
    case K::Sin:
      return std::sin(node_eval(n->a, x));
    case K::Cos:
      return std::cos(node_eval(n->a, x));
    case K::Atan:
      return std::atan(node_eval(n->a, x));
    case K::Sqrt: {
      const double v = node_eval(n->a, x);
      if (v < 0.0) throw DomainError("square root of a negative value", node_str(n));
      return std::sqrt(v);
    }
    case K::QuadForm:
      if (n->p->dim() != x.size()) throw InvalidInput("quadform dimension does not match the state");
      return n->p->quad(x);
  }
  return 0.0;
}

int node_arity(const NodePtr& n) {
  int r = n->kind == Expr::Kind::Var ? n->index + 1 : 0;
  if (n->kind == Expr::Kind::QuadForm) r = n->p->dim();
  if (n->a) r = std::max(r, node_arity(n->a));
  if (n->b) r = std::max(r, node_arity(n->b));
  return r;
}

}  // namespace

Expr::Expr() : node_(make_const(0.0)) {}

Expr Expr::constant(double v) {
  if (!std::isfinite(v)) throw InvalidInput("non-finite constant in expression");
  return Expr(make_const(v));
}

Expr Expr::var(int index) {
  if (index < 0) throw InvalidInput("negative variable index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->index = index;
  return Expr(n);
}

Expr Expr::quadform(const SymMatrix& p) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::QuadForm;
  n->p = std::make_shared<const SymMatrix>(p);
  return Expr(n);
}

Expr Expr::power(const Expr& base, int exponent) {
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return base;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->index = exponent;
  n->a = base.node_;
  return Expr(n);
}

Expr Expr::sin(const Expr& a) { return Expr(make(Kind::Sin, a.node_)); }
Expr Expr::cos(const Expr& a) { return Expr(make(Kind::Cos, a.node_)); }
Expr Expr::atan(const Expr& a) { return Expr(make(Kind::Atan, a.node_)); }
Expr Expr::sqrt(const Expr& a) { return Expr(make(Kind::Sqrt, a.node_)); }

// The arithmetic operators fold trivial constants so that derivatives stay small.
Expr operator+(const Expr& a, const Expr& b) {
  if (is_const(a.node_, 0.0)) return b;
  if (is_const(b.node_, 0.0)) return a;
  if (a.kind() == Expr::Kind::Const && b.kind() == Expr::Kind::Const)
    return Expr::constant(a.node_->value + b.node_->value);
  return Expr(make(Expr::Kind::Add, a.node_, b.node_));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (is_const(b.node_, 0.0)) return a;
  if (is_const(a.node_, 0.0)) return -b;
  if (a.kind() == Expr::Kind::Const && b.kind() == Expr::Kind::Const)
    return Expr::constant(a.node_->value - b.node_->value);
  return Expr(make(Expr::Kind::Sub, a.node_, b.node_));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (is_const(a.node_, 0.0) || is_const(b.node_, 0.0)) return Expr::constant(0.0);
  if (is_const(a.node_, 1.0)) return b;
  if (is_const(b.node_, 1.0)) return a;
  if (a.kind() == Expr::Kind::Const && b.kind() == Expr::Kind::Const)
    return Expr::constant(a.node_->value * b.node_->value);
  return Expr(make(Expr::Kind::Mul, a.node_, b.node_));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (is_const(a.node_, 0.0)) return Expr::constant(0.0);
  if (is_const(b.node_, 1.0)) return a;
  return Expr(make(Expr::Kind::Div, a.node_, b.node_));
}

Expr operator-(const Expr& a) {
  if (a.kind() == Expr::Kind::Const) return Expr::constant(-a.node_->value);
  if (a.kind() == Expr::Kind::Neg) return Expr(a.node_->a);
  return Expr(make(Expr::Kind::Neg, a.node_));
}

Expr::Kind Expr::kind() const { return node_->kind; }
bool Expr::is_constant(double v) const { return is_const(node_, v); }
double Expr::eval(const Vec& x) const { return node_eval(node_, x); }
int Expr::arity() const { return node_arity(node_); }
std::string Expr::str() const { return node_str(node_); }

Expr Expr::differentiate(int var) const {
  const Node& n = *node_;
  auto sub = [](const NodePtr& p) { return Expr(p); };
  switch (n.kind) {
    case Kind::Const:
      return constant(0.0);
    case Kind::Var:
      return constant(n.index == var ? 1.0 : 0.0);
    case Kind::Add:
      return sub(n.a).differentiate(var) + sub(n.b).differentiate(var);
    case Kind::Sub:
      return sub(n.a).differentiate(var) - sub(n.b).differentiate(var);
    case Kind::Mul:
      return sub(n.a).differentiate(var) * sub(n.b) + sub(n.a) * sub(n.b).differentiate(var);
    case Kind::Div: {
      const Expr u = sub(n.a), v = sub(n.b);
      return (u.differentiate(var) * v - u * v.differentiate(var)) / power(v, 2);
    }
    case Kind::Neg:
      return -sub(n.a).differentiate(var);
    case Kind::Pow: {
      const Expr u = sub(n.a);
      return constant(n.index) * power(u, n.index - 1) * u.differentiate(var);
    }
    case Kind::Sin:
      return cos(sub(n.a)) * sub(n.a).differentiate(var);
    case Kind::Cos:
      return -(sin(sub(n.a)) * sub(n.a).differentiate(var));
    case Kind::Atan: {
      const Expr u = sub(n.a);
      return u.differentiate(var) / (constant(1.0) + power(u, 2));
    }
    case Kind::Sqrt:
      return sub(n.a).differentiate(var) / (constant(2.0) * *this);
    case Kind::QuadForm: {
      // d/dx_i x^T P x = sum_j 2 P_ij x_j
      Expr out = constant(0.0);
      if (var >= n.p->dim()) return out;
      for (int j = 0; j < n.p->dim(); ++j) out = out + constant(2.0 * (*n.p)(var, j)) * Expr::var(j);
      return out;
    }
  }
  return constant(0.0);
}

std::vector<Expr> gradient(const Expr& e, int n) {
  std::vector<Expr> g;
  g.reserve(n);
  for (int i = 0; i < n; ++i) g.push_back(e.differentiate(i));
  return g;
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace detail {

namespace {

class ExprReader {
 public:
  ExprReader(TokenStream& ts, int n, const ConstantLookup& lookup) : ts_(ts), n_(n), lookup_(lookup) {}

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (ts_.accept("+"))
        lhs = make(Expr::Kind::Add, lhs, term());
      else if (ts_.accept("-"))
        lhs = make(Expr::Kind::Sub, lhs, term());
      else
        return lhs;
    }
  }

 private:
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (ts_.accept("*"))
        lhs = make(Expr::Kind::Mul, lhs, unary());
      else if (ts_.accept("/"))
        lhs = make(Expr::Kind::Div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (ts_.accept("-")) {
      NodePtr a = unary();
      if (a->kind == Expr::Kind::Const) return make_const(-a->value);
      return make(Expr::Kind::Neg, a);
    }
    if (ts_.accept("+")) return unary();
    return pow_expr();
  }

  NodePtr pow_expr() {
    NodePtr base = primary();
    if (ts_.accept("^")) {
      const int k = integer();
      return pow_node(base, k);
    }
    return base;
  }

  static NodePtr pow_node(NodePtr base, int k) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::Pow;
    n->index = k;
    n->a = std::move(base);
    return n;
  }

  int integer() {
    const bool neg = ts_.accept("-");
    const Token t = ts_.peek();
    if (t.kind != Token::Kind::Number || t.number != std::floor(t.number) || std::abs(t.number) > 1e6)
      ts_.fail("expected an integer exponent");
    ts_.next();
    return static_cast<int>(neg ? -t.number : t.number);
  }

  NodePtr primary() {
    const Token t = ts_.peek();
    if (t.kind == Token::Kind::Number) {
      ts_.next();
      return make_const(t.number);
    }
    if (ts_.accept("(")) {
      NodePtr e = expr();
      ts_.expect(")");
      return e;
    }
    if (t.kind != Token::Kind::Ident) ts_.fail("expected an expression");
    ts_.next();
    const std::string& id = t.text;

    if (id == "sin" || id == "cos" || id == "atan" || id == "sqrt") {
      ts_.expect("(");
      NodePtr a = expr();
      ts_.expect(")");
      const Expr::Kind k = id == "sin"    ? Expr::Kind::Sin
                           : id == "cos"  ? Expr::Kind::Cos
                           : id == "atan" ? Expr::Kind::Atan
                                          : Expr::Kind::Sqrt;
      return make(k, a);
    }
    if (id == "pow") {
      ts_.expect("(");
      NodePtr a = expr();
      ts_.expect(",");
      const int k = integer();
      ts_.expect(")");
      return pow_node(a, k);
    }
    if (id == "quadform") {
      ts_.expect("(");
      const Token at = ts_.peek();
      Mat m = parse_matrix(ts_, lookup_);
      ts_.expect(")");
      if (m.rows() != n_) ts_.fail_at(at, "quadform matrix must be " + std::to_string(n_) + "x" + std::to_string(n_));
      auto node = std::make_shared<Expr::Node>();
      node->kind = Expr::Kind::QuadForm;
      try {
        node->p = std::make_shared<const SymMatrix>(m);
      } catch (const InvalidInput& e) {
        ts_.fail_at(at, e.what());
      }
      return node;
    }
    if (id == "pi") return make_const(std::numbers::pi);
    if (id.size() > 1 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int k = std::atoi(id.c_str() + 1);
      if (k < 1 || k > n_) ts_.fail_at(t, "state variable out of range (dimension " + std::to_string(n_) + ")");
      auto node = std::make_shared<Expr::Node>();
      node->kind = Expr::Kind::Var;
      node->index = k - 1;
      return node;
    }
    if (lookup_) {
      if (auto v = lookup_(id)) return make_const(*v);
    }
    ts_.fail_at(t, "unknown identifier '" + id + "'");
  }

  TokenStream& ts_;
  int n_;
  const ConstantLookup& lookup_;
};

}  // namespace

Expr parse_expression(TokenStream& ts, int n, const ConstantLookup& lookup) {
  ExprReader r(ts, n, lookup);
  return Expr(r.expr());
}

double parse_constant(TokenStream& ts, const ConstantLookup& lookup) {
  const Token at = ts.peek();
  Expr e = parse_expression(ts, 0, lookup);
  try {
    const double v = e.eval(Vec());
    if (!std::isfinite(v)) ts.fail_at(at, "constant expression is not finite");
    return v;
  } catch (const DomainError& d) {
    ts.fail_at(at, d.what());
  }
}

Mat parse_matrix(TokenStream& ts, const ConstantLookup& lookup) {
  auto skip_nl = [&] {
    while (ts.peek().kind == Token::Kind::Newline) ts.next();
  };
  const Token at = ts.peek();
  ts.expect("[");
  std::vector<std::vector<double>> rows;
  skip_nl();
  do {
    skip_nl();
    ts.expect("[");
    std::vector<double> row;
    do {
      skip_nl();
      row.push_back(parse_constant(ts, lookup));
      skip_nl();
    } while (ts.accept(","));
    ts.expect("]");
    rows.push_back(std::move(row));
    skip_nl();
  } while (ts.accept(","));
  ts.expect("]");

  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) ts.fail_at(at, "matrix rows have different lengths");
  Mat m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace detail

Expr parse_expr(const std::string& text, int n) {
  detail::TokenStream ts(detail::tokenize(text));
  ts.skip_newlines();
  Expr e = detail::parse_expression(ts, n, {});
  ts.skip_newlines();
  if (!ts.at_end()) ts.fail("unexpected trailing input");
  return e;
}

}  // namespace mmlyap
