#include <catch2/catch_amalgamated.hpp>

#include "mmlyap/fixtures.hpp"
#include "mmlyap/maxmin.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

using namespace mmlyap;
using namespace testing;
using Catch::Approx;

namespace {

MaxMinSpec spec_of(int K, std::vector<std::vector<int>> fams, Polarity pol = Polarity::MaxMin) {
  MaxMinSpec s;
  s.K = K;
  s.families = std::move(fams);
  s.polarity = pol;
  s.validate();
  return s;
}

// Independent dualization oracle: all selections of one element per family, pruned of supersets.
std::set<std::set<int>> dual_oracle(const MaxMinSpec& s) {
  std::set<std::set<int>> sel = {{}};
  for (const auto& fam : s.families) {
    std::set<std::set<int>> next;
    for (const auto& partial : sel)
      for (int k : fam) {
        auto p = partial;
        p.insert(k);
        next.insert(p);
      }
    sel = next;
  }
  std::set<std::set<int>> pruned;
  for (const auto& a : sel) {
    bool dominated = false;
    for (const auto& b : sel)
      if (b != a && std::includes(a.begin(), a.end(), b.begin(), b.end())) dominated = true;
    if (!dominated) pruned.insert(a);
  }
  return pruned;
}

std::set<std::set<int>> as_sets(const MaxMinSpec& s) {
  std::set<std::set<int>> out;
  for (const auto& f : s.families) out.insert(std::set<int>(f.begin(), f.end()));
  return out;
}

MaxMinSpec random_spec(std::mt19937_64& rng) {
  const int K = 2 + static_cast<int>(rng() % 4);
  const int J = 1 + static_cast<int>(rng() % 3);
  std::vector<std::vector<int>> fams;
  for (int j = 0; j < J; ++j) {
    std::vector<int> f;
    for (int k = 1; k <= K; ++k)
      if (rng() % 2) f.push_back(k);
    if (f.empty()) f.push_back(1 + static_cast<int>(rng() % K));
    fams.push_back(f);
  }
  return spec_of(K, fams, rng() % 2 ? Polarity::MaxMin : Polarity::MinMax);
}

// A point with x^T D x = 0 on a random plane, when the plane meets the cone.
std::optional<Vec> tie_point(const SymMatrix& d, std::mt19937_64& rng, int n) {
  const Vec u = random_vec(rng, n), w = random_vec(rng, n);
  const double a = d.quad(u), c = d.quad(w), b = u.dot(d.mat() * w);
  const double disc = b * b - a * c;
  if (disc <= 0.0 || std::abs(c) < 1e-12) return std::nullopt;
  const double t = (-b + std::sqrt(disc)) / c;  // x = u + t w
  return Vec(u + t * w);
}

}  // namespace

TEST_CASE("permutations are lexicographic", "[maxmin]") {
  const auto p = all_permutations(3);
  REQUIRE(p.size() == 6);
  CHECK(p.front() == Permutation{1, 2, 3});
  CHECK(p[4] == Permutation{3, 1, 2});
  CHECK(p.back() == Permutation{3, 2, 1});
}

TEST_CASE("phi on the shield structure", "[maxmin]") {
  const MaxMinSpec s = spec_of(3, {{1, 2}, {3}});
  const std::vector<int> expected = {3, 3, 3, 3, 1, 2};
  const auto perms = all_permutations(3);
  for (std::size_t r = 0; r < perms.size(); ++r) CHECK(phi(s, perms[r]) == expected[r]);
}

TEST_CASE("phi with a single base function", "[maxmin]") {
  CHECK(phi(spec_of(1, {{1}}), {1}) == 1);
}

TEST_CASE("dualize examples", "[maxmin]") {
  const MaxMinSpec d = dualize(spec_of(3, {{1, 2}, {3}}));
  CHECK(d.polarity == Polarity::MinMax);
  CHECK(as_sets(d) == std::set<std::set<int>>{{1, 3}, {2, 3}});

  const MaxMinSpec single = dualize(spec_of(2, {{1, 2}}));
  CHECK(single.polarity == Polarity::MinMax);
  CHECK(as_sets(single) == std::set<std::set<int>>{{1}, {2}});

  const MaxMinSpec maxes = dualize(spec_of(2, {{1}, {2}}));
  CHECK(as_sets(maxes) == std::set<std::set<int>>{{1, 2}});
}

TEST_CASE("dualize matches the selection oracle", "[maxmin][property]") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const MaxMinSpec s = random_spec(rng);
    REQUIRE(as_sets(dualize(s)) == dual_oracle(s));
  }
}

TEST_CASE("dualize preserves values exactly", "[maxmin][property]") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const MaxMinSpec s = random_spec(rng);
    Vec v(s.K);
    for (int k = 0; k < s.K; ++k) v[k] = u(rng);
    REQUIRE(eval_values(dualize(s), v) == eval_values(s, v));
  }
}

TEST_CASE("eval examples", "[maxmin]") {
  const Config ex2 = fixtures::example2(0.0);
  CHECK(eval(*ex2.spec, *ex2.basis, Vec::Zero(2)) == 0.0);
  CHECK(eval(*ex2.spec, *ex2.basis, vec2(1, 1)) == Approx(6.0));
  CHECK(eval(dualize(*ex2.spec), *ex2.basis, vec2(1, 1)) == Approx(6.0));
  const Config ex31 = fixtures::example31(-1.0, 1.0);
  CHECK(eval(*ex31.spec, *ex31.basis, Vec::Constant(1, -2.0)) == Approx(2.0));
}

TEST_CASE("active indices examples", "[maxmin]") {
  NumericPolicy pol;
  const Config ex2 = fixtures::example2(0.0);
  const ActiveSet a = active_indices(*ex2.spec, *ex2.basis, vec2(1, 0), pol);
  CHECK(a.indices == std::vector<int>{2});
  CHECK(a.method == ActiveSet::Method::ExactSmooth);

  const Config ex1 = fixtures::example1();
  CHECK(active_indices(*ex1.spec, *ex1.basis, example1_v1(), pol).indices == std::vector<int>{1, 3});

  const Config ex31 = fixtures::example31(-1.0, 1.0);
  CHECK(active_indices(*ex31.spec, *ex31.basis, Vec::Zero(1), pol).indices == std::vector<int>{1, 2});
}

TEST_CASE("Clarke gradient examples", "[maxmin]") {
  NumericPolicy pol;
  const Config ex1 = fixtures::example1();
  const Vec v1 = example1_v1();
  const GradientHull g = clarke_gradient(*ex1.spec, *ex1.basis, v1, pol);
  REQUIRE(g.indices == std::vector<int>{1, 3});
  CHECK(g.vertices[0].isApprox(2.0 * ex1.basis->P(1).mat() * v1));
  CHECK(g.vertices[1].isApprox(2.0 * ex1.basis->P(3).mat() * v1));

  const Vec smooth = vec2(1, 0.2);
  const GradientHull s = clarke_gradient(*ex1.spec, *ex1.basis, smooth, pol);
  REQUIRE(s.vertices.size() == 1);

  const Config ex31 = fixtures::example31(-1.0, 1.0);
  const GradientHull h = clarke_gradient(*ex31.spec, *ex31.basis, Vec::Zero(1), pol);
  REQUIRE(h.vertices.size() == 2);
  CHECK(h.vertices[0][0] == Approx(1.0));
  CHECK(h.vertices[1][0] == Approx(-1.0));
}

TEST_CASE("active indices lie in the equal-value set and are nonempty", "[maxmin][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(47);
  for (const Config& c : {fixtures::example1(), fixtures::example2(0.0), fixtures::example3()}) {
    const int n = c.system.dim();
    for (int trial = 0; trial < 300; ++trial) {
      Vec x = random_vec(rng, n);
      // Every other point is moved onto a tie between two base functions.
      if (trial % 2 == 0) {
        const int K = c.basis->size();
        const int a = 1 + static_cast<int>(rng() % K);
        const int b = 1 + (a % K);
        if (auto t = tie_point(c.basis->P(a) - c.basis->P(b), rng, n)) x = *t;
      }
      const ActiveSet a = active_indices(*c.spec, *c.basis, x, pol);
      REQUIRE_FALSE(a.indices.empty());
      const auto eq = equal_value_set(*c.spec, *c.basis, x, pol);
      for (int l : a.indices) REQUIRE(std::find(eq.begin(), eq.end(), l) != eq.end());
    }
  }
}

TEST_CASE("quadratic bases are homogeneous", "[maxmin][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(53);
  const Config c = fixtures::example1();
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = trial % 4 == 0 ? Vec(example1_v1()) : random_vec(rng, 2);
    const double v = eval(*c.spec, *c.basis, x);
    const auto a = active_indices(*c.spec, *c.basis, x, pol).indices;
    for (double lam : {-2.0, -1.0, 0.5, 3.0}) {
      REQUIRE(eval(*c.spec, *c.basis, lam * x) == Approx(lam * lam * v).epsilon(1e-12));
      REQUIRE(active_indices(*c.spec, *c.basis, lam * x, pol).indices == a);
    }
  }
}

TEST_CASE("phi agrees with the selected index at strictly ordered points", "[maxmin][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(59);
  for (const Config& c : {fixtures::example1(), fixtures::example3()}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec x = random_vec(rng, c.system.dim());
      const Vec vals = c.basis->values(x);
      if (!strictly_ordered(vals)) continue;
      const int expected = phi(*c.spec, ordering(vals));
      REQUIRE(active_indices(*c.spec, *c.basis, x, pol).indices == std::vector<int>{expected});
      REQUIRE(c.basis->value(expected, x) == eval(*c.spec, *c.basis, x));
    }
  }
}
