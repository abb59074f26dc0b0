#include <catch2/catch_amalgamated.hpp>

#include "mmlyap/errors.hpp"
#include "mmlyap/fixtures.hpp"
#include "mmlyap/setderiv.hpp"
#include "support.hpp"

#include <cmath>

using namespace mmlyap;
using namespace testing;
using Catch::Approx;

namespace {

// Unit vectors on the three switching lines of the shield example.
std::vector<Vec> shield_lines() {
  const double c = std::cos(M_PI / 8), s = std::sin(M_PI / 8);
  return {example1_v1(), vec2(1, -1) / std::sqrt(2.0), vec2(-c, s)};
}

double dist_to_segment(const Vec& p, const Vec& a, const Vec& b) {
  const Vec d = b - a;
  const double L = d.squaredNorm();
  const double t = L == 0.0 ? 0.0 : std::clamp((p - a).dot(d) / L, 0.0, 1.0);
  return (p - a - t * d).norm();
}

double dist_to_set(const Vec& p, const SimplexSet& s) {
  if (s.vertices.size() == 1) return (p - s.vertices[0]).norm();
  double best = 1e300;
  for (std::size_t i = 0; i < s.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < s.vertices.size(); ++j)
      best = std::min(best, dist_to_segment(p, s.vertices[i], s.vertices[j]));
  return best;
}

}  // namespace

TEST_CASE("smooth points give the full simplex", "[setderiv]") {
  NumericPolicy pol;
  const SimplexSet s = lambda_set({vec2(1, 0)}, {vec2(1, 1), vec2(-1, 0)}, pol);
  CHECK(s.kind == SimplexSet::Kind::FullSimplex);
}

TEST_CASE("sliding weight one half on the converging line", "[setderiv]") {
  NumericPolicy pol;
  const Config c = fixtures::example2(0.0);
  const Vec x = vec2(1, 1);
  const GradientHull g = clarke_gradient(*c.spec, *c.basis, x, pol);
  const FilippovSet f = filippov_set(c.system, x, pol);
  const SimplexSet s = lambda_set(g.vertices, f.vertices, pol);
  REQUIRE(s.kind == SimplexSet::Kind::Point);
  CHECK(s.vertices[0][0] == Approx(0.5).margin(1e-12));
  CHECK(s.vertices[0][1] == Approx(0.5).margin(1e-12));
}

TEST_CASE("no admissible weights on the shield switching lines", "[setderiv]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  for (const Vec& v : shield_lines()) {
    const GradientHull g = clarke_gradient(*c.spec, *c.basis, v, pol);
    const FilippovSet f = filippov_set(c.system, v, pol);
    REQUIRE(g.vertices.size() == 2);
    REQUIRE(f.vertices.size() == 2);
    CHECK(lambda_set(g.vertices, f.vertices, pol).empty());
    CHECK(lie_derivative(*c.spec, *c.basis, c.system, v, pol).empty);
  }
}

TEST_CASE("one-dimensional absolute value over a sign grid", "[setderiv]") {
  NumericPolicy pol;
  const Vec zero = Vec::Zero(1);
  for (double f1 : {-2.0, -1.0, 0.0, 1.0, 3.0})
    for (double f2 : {-3.0, -1.0, 0.0, 1.0, 2.0}) {
      const Config c = fixtures::example31(f1, f2);
      const ClarkeSet cl = clarke_derivative(*c.spec, *c.basis, c.system, zero, pol);
      const double m = std::max(std::abs(f1), std::abs(f2));
      CHECK(cl.lo == -m);
      CHECK(cl.hi == m);
      const LieSet lie = lie_derivative(*c.spec, *c.basis, c.system, zero, pol);
      const bool contains_zero = std::min(f1, f2) <= 0.0 && 0.0 <= std::max(f1, f2);
      CHECK(lie.empty == !contains_zero);
      if (!lie.empty) {
        CHECK(std::abs(lie.lo) <= 1e-12 * m);
        CHECK(std::abs(lie.hi) <= 1e-12 * m);
      }
    }
}

TEST_CASE("Clarke derivative at a smooth point equals the Lie singleton", "[setderiv]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  const Vec x = vec2(1.0, 0.3);
  const LieSet l = lie_derivative(*c.spec, *c.basis, c.system, x, pol);
  const ClarkeSet cl = clarke_derivative(*c.spec, *c.basis, c.system, x, pol);
  REQUIRE_FALSE(l.empty);
  CHECK(l.lo == Approx(l.hi));
  CHECK(cl.lo == Approx(l.lo));
  CHECK(cl.hi == Approx(l.hi));
}

TEST_CASE("decrease check, Lie versus Clarke on the shield lines", "[setderiv]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  const auto pts = shield_lines();
  const DecreaseReport lie = decrease_check(*c.spec, *c.basis, c.system, pts, 0.0, false, pol);
  CHECK(lie.violations == 0);
  for (const auto& p : lie.points) CHECK_FALSE(p.value.has_value());
  const DecreaseReport cl = decrease_check(*c.spec, *c.basis, c.system, {example1_v1()}, 0.0, true, pol);
  CHECK(cl.violations == 1);
  CHECK(*cl.points[0].value > 0.0);
  CHECK_THROWS_AS(decrease_check(*c.spec, *c.basis, c.system, {}, 0.0, false, pol), InvalidInput);
}

TEST_CASE("decrease check on the converging sliding line", "[setderiv]") {
  NumericPolicy pol;
  const Config c = fixtures::example2(10.0);
  std::vector<Vec> pts;
  for (int k = 1; k <= 100; ++k) pts.push_back(vec2(0.1 * k, 0.1 * k));
  const DecreaseReport r = decrease_check(*c.spec, *c.basis, c.system, pts, 12.5, false, pol);
  CHECK(r.violations == 0);
  CHECK(r.note.find("not certified") != std::string::npos);
}

TEST_CASE("two-field sign criterion", "[setderiv][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec g1 = random_vec(rng, 2), g2 = random_vec(rng, 2);
    const Vec f1 = random_vec(rng, 2), f2 = random_vec(rng, 2);
    const Vec d = g1 - g2;
    const double a = d.dot(f1), b = d.dot(f2);
    const bool expected = a * b <= 0.0;
    REQUIRE(!lambda_set({g1, g2}, {f1, f2}, pol).empty() == expected);
  }
}

TEST_CASE("lambda_set agrees with a brute-force simplex grid", "[setderiv][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(73);
  const double h = 1e-3;
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + trial % 2;
    const int p = 2 + (m == 3 && trial % 4 == 1 ? 1 : 0);
    std::vector<Vec> grads, fields;
    for (int k = 0; k < p; ++k) grads.push_back(random_vec(rng, 3));
    for (int j = 0; j < m; ++j) fields.push_back(random_vec(rng, 3));
    Mat rows(p - 1, m);
    for (int k = 0; k + 1 < p; ++k) {
      for (int j = 0; j < m; ++j) rows(k, j) = (grads[k + 1] - grads[k]).dot(fields[j]);
      rows.row(k) /= rows.row(k).lpNorm<Eigen::Infinity>();
    }
    // Skip nearly parallel constraint pairs, whose solution is ill-conditioned.
    double point_gain = 0.0;
    if (p == 3) {
      const Vec r0 = rows.row(0).transpose(), r1 = rows.row(1).transpose();
      const Vec ones = Vec::Ones(m);
      Mat M(3, 3);
      M << r0.transpose(), r1.transpose(), ones.transpose();
      if (std::abs(M.determinant()) < 0.3) continue;
      point_gain = M.inverse().norm();
    }
    const SimplexSet s = lambda_set(grads, fields, pol);

    std::vector<Vec> grid;
    const int N = static_cast<int>(std::lround(1.0 / h));
    for (int i = 0; i <= N; ++i) {
      const int jmax = m == 3 ? N - i : 0;
      for (int j = 0; j <= jmax; ++j) {
        Vec lam(m);
        if (m == 2) lam << i * h, 1.0 - i * h;
        else lam << i * h, j * h, 1.0 - (i + j) * h;
        bool ok = true;
        for (int k = 0; k < rows.rows() && ok; ++k)
          ok = std::abs(rows.row(k).dot(lam)) <= rows.row(k).lpNorm<1>() * h;
        if (ok) grid.push_back(lam);
      }
    }
    if (s.empty()) {
      // The grid may still catch near-misses at corners; every such point is within the band.
      for (const auto& g : grid) REQUIRE((rows * g).lpNorm<Eigen::Infinity>() <= 2 * h);
      continue;
    }
    REQUIRE_FALSE(grid.empty());
    // The band |r . lambda| <= h |r|_1 is widest across the simplex when r is nearly constant.
    double tol = 1e-2;
    for (int k = 0; k < rows.rows(); ++k) {
      const Vec r = rows.row(k).transpose();
      const double across = (r - Vec::Constant(m, r.mean())).norm();
      tol = std::max(tol, 2.0 * h * r.lpNorm<1>() / across + h * std::sqrt(double(m)));
      // Two crossing bands form a parallelogram whose size scales with the inverse system.
      tol = std::max(tol, 2.0 * h * r.lpNorm<1>() * point_gain + h * std::sqrt(double(m)));
    }
    for (const auto& g : grid) REQUIRE(dist_to_set(g, s) <= tol);
    for (const auto& v : s.vertices) {
      double best = 1e300;
      for (const auto& g : grid) best = std::min(best, (g - v).norm());
      REQUIRE(best <= tol);
    }
    ++compared;
  }
  CHECK(compared >= 20);
}

TEST_CASE("Lie set lies inside the Clarke interval", "[setderiv][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(79);
  const Config ex1 = fixtures::example1(), ex2 = fixtures::example2(10.0), ex3 = fixtures::example3();
  const auto lines = shield_lines();
  int nonempty = 0;
  for (const Config* c : {&ex1, &ex2, &ex3}) {
    const int n = c->system.dim();
    for (int trial = 0; trial < 1000; ++trial) {
      Vec x = random_vec(rng, n);
      // A quarter of the points sit on switching surfaces, where the sets are nontrivial.
      if (trial % 4 == 0) {
        if (c == &ex1) x = lines[trial % 3] * x.norm();
        if (c == &ex2) x = vec2(x[0], (trial % 8 == 0 ? 1.0 : -1.0) * x[0]);
        if (c == &ex3) x[2] = (x[2] < 0 ? -1.0 : 1.0) * std::hypot(x[0], x[1]);
      }
      const LieSet l = lie_derivative(*c->spec, *c->basis, c->system, x, pol);
      const ClarkeSet cl = clarke_derivative(*c->spec, *c->basis, c->system, x, pol);
      REQUIRE(cl.lo <= cl.hi);
      if (l.empty) continue;
      ++nonempty;
      const double tol = 1e-9 * std::max(1.0, std::abs(cl.hi) + std::abs(cl.lo));
      REQUIRE(l.lo >= cl.lo - tol);
      REQUIRE(l.hi <= cl.hi + tol);
    }
  }
  CHECK(nonempty > 1500);
}
