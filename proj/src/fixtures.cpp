#include "mmlyap/fixtures.hpp"

#include <cmath>

namespace mmlyap::fixtures {

namespace {

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

SymMatrix s2(double a, double b, double d) { return SymMatrix(m2(a, b, b, d)); }

MaxMinSpec structure(int K, std::vector<std::vector<int>> families, Polarity pol) {
  MaxMinSpec s;
  s.K = K;
  s.families = std::move(families);
  s.polarity = pol;
  s.validate();
  return s;
}

Mode function_mode(std::vector<Expr> f, const Expr& h, int n) {
  Mode m = SwitchedSystem::expr_mode(std::move(f), n);
  m.region = Mode::Region::Function;
  m.H = h;
  m.grad_H = gradient(h, n);
  return m;
}

}  // namespace

// Shield example: three rotating modes, each unstable along part of its cone,
// separated by the lines x2 = -(1+sqrt2) x1, x2 = -x1 and x2 = -x1/(1+sqrt2).
Config example1() {
  const double r = std::sqrt(2.0);
  const Mat A1 = m2(-0.1, 1, -5, -0.1);
  const Mat A2 = m2(-0.1, 5, -1, -0.1);
  const Mat A3 = m2(1.9, 3, -3, -2.1);
  const SymMatrix Q1 = s2(-(1 + r), -(2 + r) / 2, -1);
  const SymMatrix Q2 = s2(-1 / (1 + r), -r / 2, -1);
  const SymMatrix Q3 = s2(1, r, 1);
  Config c;
  c.system = SwitchedSystem(2, {SwitchedSystem::linear_mode(A1, Q1), SwitchedSystem::linear_mode(A2, Q2),
                                SwitchedSystem::linear_mode(A3, Q3)});
  c.basis = Basis::quadratic({s2(5, 0, 1), s2(1, 0, 5), s2(3, 2, 3)});
  c.spec = structure(3, {{1, 2}, {3}}, Polarity::MaxMin);

  // tau_1..tau_7 of the four reduced inequalities, spread over the (mode, ordering) pairs they cover.
  const double t[7] = {0.258, 0.102, 0.258, 0.102, 0.284, 0.193, 0.090};
  auto tau = [&](int mode, Permutation rho, double a, double b) {
    Vec v(2);
    v << a, b;
    c.multipliers.tau[{mode, rho}] = v;
  };
  tau(2, {3, 2, 1}, t[0], t[1]);
  tau(1, {3, 1, 2}, t[2], t[3]);
  tau(3, {1, 2, 3}, t[4], t[4]);
  tau(3, {1, 3, 2}, t[4], 0.0);
  tau(3, {2, 1, 3}, 0.0, t[4]);
  tau(3, {2, 3, 1}, t[5], t[6]);
  return c;
}

Candidate example1_candidate() {
  const Config c = example1();
  return {c.basis->matrices(), c.multipliers};
}

Vec example1_z0() {
  Vec z(2);
  z << -1.0, 1.0;
  return z;
}

// Two rotations switching on x1^2 = x2^2, with the arctan damping term -b atan(x).
Config example2(double b) {
  const Mat A1 = m2(-0.1, 1, -5, -0.1);
  const Mat A2 = m2(-0.1, -5, 1, -0.1);
  const SymMatrix Q = s2(1, 0, -1);
  auto field = [&](const Mat& A) {
    std::vector<Expr> f;
    for (int i = 0; i < 2; ++i) {
      Expr e = Expr::constant(A(i, 0)) * Expr::var(0) + Expr::constant(A(i, 1)) * Expr::var(1);
      if (b != 0.0) e = e - Expr::constant(b) * Expr::atan(Expr::var(i));
      f.push_back(e);
    }
    return f;
  };
  Mode m1 = SwitchedSystem::expr_mode(field(A1), 2);
  m1.region = Mode::Region::Cone;
  m1.Q = s2(-1, 0, 1);
  Mode m2m = SwitchedSystem::expr_mode(field(A2), 2);
  m2m.region = Mode::Region::Cone;
  m2m.Q = Q;
  if (b == 0.0) m1.A = A1, m2m.A = A2;
  Config c;
  c.system = SwitchedSystem(2, {m1, m2m});
  c.basis = Basis::quadratic({s2(5, 0, 1), s2(1, 0, 5)});
  c.spec = structure(2, {{1, 2}}, Polarity::MaxMin);
  if (b != 0.0) c.constants.push_back({"b", b});
  return c;
}

// Three-dimensional pair of modes split by the cone x1^2 + x2^2 = x3^2.
Config example3() {
  Mat A1(3, 3), A2(3, 3);
  A1 << -0.1, -1, 0, 1, -0.1, 0, 0, 0, 0.2;
  A2 << -0.2, 1, 0.1, -1, -0.2, 0, 0.1, 0, -0.1;
  Vec q(3), p1(3), p2(3);
  q << 1, 1, -1;
  p1 << 4, 4, 1;
  p2 << 3, 3, 2;
  const SymMatrix Q = SymMatrix::diagonal(q);
  Config c;
  c.system = SwitchedSystem(3, {SwitchedSystem::linear_mode(A1, Q), SwitchedSystem::linear_mode(A2, -Q)});
  c.basis = Basis::quadratic({SymMatrix::diagonal(p1), SymMatrix::diagonal(p2)});
  c.spec = structure(2, {{1}, {2}}, Polarity::MaxMin);
  // Mode 1 meets only the ordering V2 < V1, where P1 - P2 = Q; mode 2 needs no multiplier.
  c.multipliers.tau[{1, {2, 1}}] = Vec::Constant(1, 0.6);
  c.multipliers.tau[{2, {1, 2}}] = Vec::Constant(1, 0.0);
  return c;
}

Candidate example3_candidate() {
  const Config c = example3();
  return {c.basis->matrices(), c.multipliers};
}

Config example31(double f1, double f2) {
  const Expr x = Expr::var(0);
  Config c;
  c.system = SwitchedSystem(1, {function_mode({Expr::constant(f1)}, -x, 1), function_mode({Expr::constant(f2)}, x, 1)});
  c.basis = Basis::expressions({x, -x}, 1);
  c.spec = structure(2, {{1}, {2}}, Polarity::MaxMin);
  return c;
}

std::string text(const Config& cfg) { return to_text(cfg); }

}  // namespace mmlyap::fixtures
