#include <catch2/catch_amalgamated.hpp>

#include "mmlyap/filippov.hpp"
#include "mmlyap/fixtures.hpp"
#include "mmlyap/report.hpp"
#include "mmlyap/setderiv.hpp"
#include "support.hpp"

#include <cmath>
#include <sstream>

using namespace mmlyap;
using namespace testing;
using Catch::Approx;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

SwitchedSystem single_mode(const Mat& a) { return SwitchedSystem(static_cast<int>(a.rows()), {SwitchedSystem::linear_mode(a, std::nullopt)}); }

bool event_between(const Trajectory& t, double a, double b) {
  for (const auto& e : t.events)
    if (e.t > a - 1e-12 && e.t < b + 1e-12) return true;
  return false;
}

}  // namespace

TEST_CASE("single stable mode decays exponentially", "[filippov]") {
  SimOptions o;
  o.horizon = 1.0;
  const Trajectory t = simulate(single_mode(-Mat::Identity(2, 2)), vec2(1, 0), o);
  REQUIRE(t.status == Trajectory::Status::Completed);
  const Vec& x = t.samples.back().x;
  CHECK(t.samples.back().t == Approx(1.0));
  CHECK(std::abs(x[0] - std::exp(-1.0)) < 1e-6);
  CHECK(std::abs(x[1]) < 1e-12);
}

TEST_CASE("shield half turn contracts by beta", "[filippov]") {
  const HalfTurn h = example1_half_turn();
  REQUIRE(h.points.size() == 3);
  CHECK(h.norm_z3 == Approx(1.2671).margin(1e-3));
  CHECK(h.beta == Approx(0.8961).margin(1e-3));
  // z3 lies on the line x2 = -x1 again, after the lines S13 and S32.
  CHECK(h.points[2][0] == Approx(-h.points[2][1]).margin(1e-9));
  CHECK(h.times[0] < h.times[1]);
  CHECK(h.times[1] < h.times[2]);
}

TEST_CASE("sliding weights on the arctan system", "[filippov]") {
  NumericPolicy pol;
  const SwitchedSystem sys = fixtures::example2(10.0).system;
  for (double r : {0.01, 1.0, 30.0}) {
    CHECK(*sliding_lambda(sys, vec2(r, r), 1, pol) == Approx(0.5).margin(1e-12));
    CHECK(*sliding_lambda(sys, vec2(r, -r), 1, pol) == Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("transversal crossing has no sliding weight", "[filippov]") {
  NumericPolicy pol;
  const SwitchedSystem sys = fixtures::example1().system;
  const SlidingTest s = sliding_test(sys, example1_v1(), 1, 3, pol);
  CHECK_FALSE(s.lambda.has_value());
  CHECK(s.a * s.b > 0.0);
}

TEST_CASE("diverging sliding far out on the second line", "[filippov]") {
  const SwitchedSystem sys = fixtures::example2(10.0).system;
  SimOptions o;
  o.horizon = 0.5;
  const Trajectory t = simulate(sys, vec2(20, -20), o);
  bool slid = false;
  for (const auto& s : t.samples)
    if (s.regime.kind == Regime::Kind::Sliding) {
      slid = true;
      CHECK(s.lambda == Approx(0.5).margin(1e-9));
    }
  CHECK(slid);
  CHECK(t.samples.back().x.norm() > t.samples.front().x.norm());
}

TEST_CASE("converging sliding near the origin on the second line", "[filippov]") {
  const SwitchedSystem sys = fixtures::example2(10.0).system;
  SimOptions o;
  o.horizon = 0.5;
  const Trajectory t = simulate(sys, vec2(0.05, -0.05), o);
  CHECK(t.samples.back().x.norm() < t.samples.front().x.norm());
}

TEST_CASE("CSV export schema", "[filippov]") {
  Trajectory one;
  one.samples.push_back({0.0, vec2(1, 2), Regime::mode(1), 0.0});
  const auto l = lines_of(export_csv(one));
  REQUIRE(l.size() == 2);
  CHECK(l[0] == "t,x1,x2,regime,lambda");

  const Config c3 = fixtures::example3();
  SimOptions o;
  o.horizon = 1.0;
  const Trajectory t3 = simulate(c3.system, vec3(1, 0, 0.5), o);
  const auto l3 = lines_of(export_csv(t3, &*c3.spec, &*c3.basis));
  CHECK(l3[0] == "t,x1,x2,x3,regime,lambda,V");
  CHECK(l3.size() == t3.samples.size() + 1);

  const Config c2 = fixtures::example2(10.0);
  const Trajectory t2 = simulate(c2.system, vec2(1, 1), o);
  bool sliding_row = false;
  for (const auto& row : lines_of(export_csv(t2)))
    if (row.find("Sliding(1),0.5") != std::string::npos) sliding_row = true;
  CHECK(sliding_row);
}

TEST_CASE("linear single-mode trajectories match the matrix exponential", "[filippov][property]") {
  std::mt19937_64 rng(83);
  SimOptions o;
  o.horizon = 10.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    const Mat a = 0.3 * random_mat(rng, n) - 0.2 * Mat::Identity(n, n);
    const Vec x0 = random_vec(rng, n);
    const Trajectory t = simulate(single_mode(a), x0, o);
    for (std::size_t k = 0; k < t.samples.size(); k += 7) {
      const Vec exact = expm(a, t.samples[k].t) * x0;
      REQUIRE((t.samples[k].x - exact).norm() <= 1e-6 * std::max(1.0, exact.norm()));
    }
  }
}

TEST_CASE("shield trajectories are centrally symmetric", "[filippov][property]") {
  const SwitchedSystem sys = fixtures::example1().system;
  SimOptions o;
  o.horizon = 4.0;
  const Vec z0 = fixtures::example1_z0();
  const Trajectory a = simulate(sys, z0, o);
  const Trajectory b = simulate(sys, -z0, o);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    REQUIRE(a.samples[k].t == Approx(b.samples[k].t).margin(1e-12));
    REQUIRE((a.samples[k].x + b.samples[k].x).norm() <= 1e-8);
  }
}

TEST_CASE("sliding samples stay tangent to the surface", "[filippov][property]") {
  NumericPolicy pol;
  const SwitchedSystem sys = fixtures::example2(10.0).system;
  SimOptions o;
  o.horizon = 2.0;
  int sliding = 0;
  for (const Vec& x0 : {vec2(1, 1), vec2(-2, -2), vec2(20, -20), vec2(0.5, 0.3)}) {
    const Trajectory t = simulate(sys, x0, o);
    for (const auto& s : t.samples) {
      if (s.regime.kind != Regime::Kind::Sliding) continue;
      ++sliding;
      const Vec v = regime_velocity(sys, s.regime, s.x, pol);
      const Vec n = sys.region_grad(s.regime.i, s.x);
      REQUIRE(std::abs(n.normalized().dot(v)) <= 1e-6 * std::max(1.0, v.norm()));
    }
  }
  CHECK(sliding > 0);
}

TEST_CASE("finite-difference derivative of V lies in the Lie set", "[filippov][property]") {
  NumericPolicy pol;
  const Config ex1 = fixtures::example1(), ex2 = fixtures::example2(10.0), ex3 = fixtures::example3();
  struct Run {
    const Config* c;
    Vec x0;
  };
  const std::vector<Run> runs = {{&ex1, fixtures::example1_z0()}, {&ex1, vec2(0.3, 2)},  {&ex2, vec2(1, 1)},
                                 {&ex2, vec2(1, 0.3)},            {&ex2, vec2(20, -20)}, {&ex3, vec3(1, 0, 0.5)},
                                 {&ex3, vec3(0.2, -0.4, 1)}};
  SimOptions o;
  o.horizon = 3.0;
  o.max_step = 0.01;
  int checked = 0;
  for (const auto& r : runs) {
    const Config& c = *r.c;
    const Trajectory t = simulate(c.system, r.x0, o);
    for (std::size_t k = 0; k + 1 < t.samples.size(); ++k) {
      const auto& a = t.samples[k];
      const auto& b = t.samples[k + 1];
      if (!(a.regime == b.regime) || event_between(t, a.t, b.t) || b.t - a.t < 1e-9) continue;
      const double fd = (eval(*c.spec, *c.basis, b.x) - eval(*c.spec, *c.basis, a.x)) / (b.t - a.t);
      const Vec mid = 0.5 * (a.x + b.x);
      const LieSet l = lie_derivative(*c.spec, *c.basis, c.system, mid, pol);
      if (l.empty) continue;
      const double tol = 1e-3 * std::max(1.0, mid.squaredNorm() + std::abs(l.hi));
      REQUIRE(fd >= l.lo - tol);
      REQUIRE(fd <= l.hi + tol);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}
