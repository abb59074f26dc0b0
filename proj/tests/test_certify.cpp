#include <catch2/catch_amalgamated.hpp>

#include "mmlyap/certify.hpp"
#include "mmlyap/errors.hpp"
#include "mmlyap/fixtures.hpp"
#include "support.hpp"

#include <cmath>

using namespace mmlyap;
using namespace testing;
using Catch::Approx;

namespace {

MaxMinSpec spec_of(int K, std::vector<std::vector<int>> fams) {
  MaxMinSpec s;
  s.K = K;
  s.families = std::move(fams);
  s.validate();
  return s;
}

Mat outer_sym(const Vec& a, const Vec& b) { return a * b.transpose() + b * a.transpose(); }

// Planar two-mode system split by x^T Q x with Q = diag(1, -1).
SwitchedSystem planar_pair(const Mat& a1, const Mat& a2) {
  const SymMatrix q(mat2(1, 0, 0, -1));
  return SwitchedSystem(2, {SwitchedSystem::linear_mode(a1, -q), SwitchedSystem::linear_mode(a2, q)});
}

SwitchedSystem cone_pair3(const Mat& a1, const Mat& a2) {
  Vec d(3);
  d << 1, 1, -1;
  const SymMatrix q = SymMatrix::diagonal(d);
  return SwitchedSystem(3, {SwitchedSystem::linear_mode(a1, q), SwitchedSystem::linear_mode(a2, -q)});
}

}  // namespace

TEST_CASE("shield candidate satisfies the reduced inequalities", "[certify]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  const ConditionIReport r = check_condition_i(c.system, *c.spec, fixtures::example1_candidate(), pol);
  CHECK(r.pass);
  REQUIRE(r.inequalities.size() == 4);
  for (const auto& q : r.inequalities) CHECK(q.margin < -1e-6);
  int nonvacuous = 0;
  for (const auto& p : r.pairs) nonvacuous += p.vacuous ? 0 : 1;
  CHECK(nonvacuous == 6);
}

TEST_CASE("three-dimensional candidate satisfies both inequalities", "[certify]") {
  NumericPolicy pol;
  const Config c = fixtures::example3();
  const ConditionIReport r = check_condition_i(c.system, *c.spec, fixtures::example3_candidate(), pol);
  CHECK(r.pass);
  REQUIRE(r.inequalities.size() == 2);
  for (const auto& q : r.inequalities) CHECK(q.margin < 0.0);
}

TEST_CASE("identity basis fails on the unstable-looking mode", "[certify]") {
  const Config c = fixtures::example1();
  Candidate cand;
  cand.P = {SymMatrix::identity(2), SymMatrix::identity(2), SymMatrix::identity(2)};
  const SymMatrix m = condition_i_matrix(c.system, cand, 3, {1, 2, 3}, 3, Vec::Zero(2), 0.0);
  CHECK(negdef_margin(m) == Approx(3.8));
  CHECK_FALSE(check_condition_i(c.system, *c.spec, cand, NumericPolicy{}).pass);
}

TEST_CASE("condition (i) refuses more than six base functions", "[certify]") {
  const SwitchedSystem sys(2, {SwitchedSystem::linear_mode(-Mat::Identity(2, 2), std::nullopt)});
  Candidate cand;
  for (int k = 0; k < 7; ++k) cand.P.push_back(SymMatrix::identity(2) * (1.0 + k));
  CHECK_THROWS_AS(check_condition_i(sys, spec_of(7, {{1, 2, 3, 4, 5, 6, 7}}), cand, NumericPolicy{}),
                  PreconditionError);
}

TEST_CASE("search recovers the classical Lyapunov case", "[certify][search]") {
  const SwitchedSystem sys(2, {SwitchedSystem::linear_mode(mat2(-1, 2, -2, -1), std::nullopt)});
  SearchOptions o;
  o.time_budget = 10;
  const SearchResult r = search_condition_i(sys, spec_of(1, {{1}}), o);
  REQUIRE(r.found);
  CHECK(r.report.pass);
  CHECK(r.report.worst < -1e-6);
}

TEST_CASE("search gives up on an unstable mode", "[certify][search]") {
  const SwitchedSystem sys(2, {SwitchedSystem::linear_mode(Mat::Identity(2, 2), std::nullopt)});
  SearchOptions o;
  o.time_budget = 2;
  o.starts = 4;
  const SearchResult r = search_condition_i(sys, spec_of(1, {{1}}), o);
  CHECK_FALSE(r.found);
  CHECK_FALSE(r.note.empty());
}

TEST_CASE("search on the shield structure passes the independent checker", "[certify][search]") {
  const Config c = fixtures::example1();
  SearchOptions o;
  o.time_budget = 60;
  const SearchResult r = search_condition_i(c.system, *c.spec, o);
  REQUIRE(r.found);
  const ConditionIReport check = check_condition_i(c.system, *c.spec, r.candidate, NumericPolicy{});
  CHECK(check.pass);
  for (const auto& q : check.inequalities) CHECK(q.margin < -1e-6);
}

TEST_CASE("cone decomposition examples", "[certify]") {
  {
    const auto [t1, t2] = q_cone_decompose(SymMatrix(mat2(0, 1, 1, 0)));
    CHECK((outer_sym(t1, t2) - mat2(0, 1, 1, 0)).norm() < 1e-12);
  }
  {
    const auto [t1, t2] = q_cone_decompose(SymMatrix(mat2(1, 0, 0, -1)));
    CHECK((outer_sym(t1, t2) - mat2(1, 0, 0, -1)).norm() < 1e-12);
    CHECK(t1.norm() == Approx(1.0));
    CHECK(t2.norm() == Approx(1.0));
    CHECK(std::abs(t1.dot(t2)) < 1e-12);
  }
  {
    const double r = std::sqrt(2.0);
    const auto [t1, t2] = q_cone_decompose(SymMatrix(mat2(1, r, r, 1)));
    CHECK((outer_sym(t1, t2) - mat2(1, r, r, 1)).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(q_cone_decompose(SymMatrix(mat2(1, 0, 0, 2))), PreconditionError);
  CHECK_THROWS_AS(q_cone_decompose(SymMatrix(mat2(-1, 0, 0, 0))), PreconditionError);
}

TEST_CASE("cone decomposition reconstructs random indefinite matrices", "[certify][property]") {
  std::mt19937_64 rng(89);
  int done = 0;
  while (done < 1000) {
    const SymMatrix q = random_sym(rng, 2);
    if (q.mat().determinant() > -1e-6) continue;
    const auto [t1, t2] = q_cone_decompose(q);
    REQUIRE((outer_sym(t1, t2) - q.mat()).norm() <= 1e-8 * std::max(1.0, q.mat().norm()));
    ++done;
  }
}

TEST_CASE("planar second condition on the shield system", "[certify]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  const PlanarReport r = planar_condition_ii(c.system, *c.spec, fixtures::example1_candidate(), pol);
  CHECK(r.pass);
  REQUIRE(r.points.size() == 3);
  for (const auto& p : r.points) {
    CHECK(p.lambda.empty());
    CHECK(p.active.size() == 2);
  }
  CHECK(r.chain.reconstruction <= 1e-10);
}

TEST_CASE("planar second condition fails where linear sliding diverges", "[certify]") {
  NumericPolicy pol;
  // Without the arctan damping, sliding along x2 = -x1 increases min(V1, V2).
  const SwitchedSystem sys = fixtures::example2(0.0).system;
  Candidate cand;
  cand.P = {SymMatrix(mat2(5, 0, 0, 1)), SymMatrix(mat2(1, 0, 0, 5))};
  const MaxMinSpec spec = spec_of(2, {{1, 2}});
  const PlanarReport r = planar_condition_ii(sys, spec, cand, pol);
  CHECK_FALSE(r.pass);
  bool found = false;
  for (const auto& p : r.points) {
    if (p.pass) continue;
    found = true;
    REQUIRE(p.value.has_value());
    // Direct evaluation: the largest 2 v^T P_l (sum lambda_j A_j) v over the weight vertices.
    const int l = p.active.front();
    double direct = -1e300;
    for (const auto& lam : p.lambda.vertices) {
      const Vec f = lam[0] * (*sys.mode(p.mode_prev).A * p.v) + lam[1] * (*sys.mode(p.mode).A * p.v);
      direct = std::max(direct, 2.0 * p.v.dot(cand.P[l - 1].mat() * f));
    }
    CHECK(*p.value == Approx(direct));
    CHECK(direct > 0.0);
  }
  CHECK(found);
}

TEST_CASE("planar second condition is vacuous for a smooth function", "[certify]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  Candidate cand;
  cand.P = {SymMatrix::identity(2)};
  const PlanarReport r = planar_condition_ii(c.system, spec_of(1, {{1}}), cand, pol);
  CHECK(r.pass);
  for (const auto& p : r.points) CHECK(p.active.size() == 1);
}

TEST_CASE("sliding exclusion examples", "[certify]") {
  NumericPolicy pol;
  const ExclusionReport ok = sliding_exclusion(fixtures::example3().system, pol, 10000);
  CHECK(ok.pass);
  CHECK(ok.min_product > 0.0);

  const ExclusionReport zero = sliding_exclusion(planar_pair(-Mat::Identity(2, 2), -Mat::Identity(2, 2)), pol, 1000);
  CHECK_FALSE(zero.pass);
  CHECK(std::abs(zero.min_product) < 1e-12);

  Vec d(3);
  d << 1, 0, -1;
  const SymMatrix singular = SymMatrix::diagonal(d);
  const SwitchedSystem s(3, {SwitchedSystem::linear_mode(-Mat::Identity(3, 3), singular),
                             SwitchedSystem::linear_mode(-Mat::Identity(3, 3), -singular)});
  CHECK_THROWS_AS(sliding_exclusion(s, pol, 100), PreconditionError);
}

TEST_CASE("two-mode second condition", "[certify]") {
  NumericPolicy pol;
  const Config c = fixtures::example3();
  const TwoModeReport good = check_condition_ii_2mode(c.system, *c.spec, fixtures::example3_candidate(), pol);
  CHECK(good.pass);
  CHECK(good.rank_pass);
  CHECK(good.rank_margin == Approx(1.0));

  Candidate same = fixtures::example3_candidate();
  same.P[1] = same.P[0];
  const TwoModeReport rank = check_condition_ii_2mode(c.system, *c.spec, same, pol);
  CHECK_FALSE(rank.rank_pass);
  CHECK_FALSE(rank.pass);

  const Mat a1 = *c.system.mode(1).A;
  const TwoModeReport slide =
      check_condition_ii_2mode(cone_pair3(a1, -a1), *c.spec, fixtures::example3_candidate(), pol);
  CHECK_FALSE(slide.exclusion.pass);
  CHECK(slide.exclusion.min_product < 0.0);
  CHECK_FALSE(slide.pass);
}

TEST_CASE("end-to-end verdicts", "[certify]") {
  NumericPolicy pol;
  const Config e1 = fixtures::example1();
  const Certificate c1 = certify(e1.system, *e1.spec, fixtures::example1_candidate(), CertifyOptions{}, pol);
  CHECK(c1.verdict == Verdict::GasCertified);
  CHECK(c1.planar.has_value());

  const Config e3 = fixtures::example3();
  const Certificate c3 = certify(e3.system, *e3.spec, fixtures::example3_candidate(), CertifyOptions{}, pol);
  CHECK(c3.verdict == Verdict::GasCertified);
  CHECK(c3.two_mode.has_value());

  Vec d1(3), d2(3), d3(3);
  d1 << 1, -1, -1;
  d2 << -1, 1, -1;
  d3 << -1, -1, 1;
  const SwitchedSystem s3(3, {SwitchedSystem::linear_mode(-Mat::Identity(3, 3), SymMatrix::diagonal(d1)),
                              SwitchedSystem::linear_mode(-Mat::Identity(3, 3), SymMatrix::diagonal(d2)),
                              SwitchedSystem::linear_mode(-Mat::Identity(3, 3), SymMatrix::diagonal(d3))});
  Candidate id;
  id.P = {SymMatrix::identity(3)};
  const Certificate c = certify(s3, spec_of(1, {{1}}), id, CertifyOptions{}, pol);
  CHECK(c.verdict == Verdict::ConditionIOnly);
  CHECK(c.condition_ii_note.find("unchecked") != std::string::npos);

  CHECK_THROWS_AS(certify(e1.system, *e1.spec, std::nullopt, CertifyOptions{}, pol), PreconditionError);
}

TEST_CASE("certificates survive independent re-verification", "[certify][property]") {
  NumericPolicy pol;
  const Config e1 = fixtures::example1();
  Certificate c1 = certify(e1.system, *e1.spec, fixtures::example1_candidate(), CertifyOptions{}, pol);
  std::string why;
  CHECK(reverify(e1.system, *e1.spec, c1, &why));

  const Config e3 = fixtures::example3();
  const Certificate c3 = certify(e3.system, *e3.spec, fixtures::example3_candidate(), CertifyOptions{}, pol);
  CHECK(reverify(e3.system, *e3.spec, c3, &why));

  // Tampering with a stored margin or the basis is detected.
  Certificate bad = c1;
  for (auto& pm : bad.condition_i.pairs)
    if (!pm.vacuous) {
      pm.margin = -1.0;
      break;
    }
  CHECK_FALSE(reverify(e1.system, *e1.spec, bad, &why));
  CHECK_FALSE(why.empty());
  Certificate bad2 = c1;
  bad2.candidate.P[2] = SymMatrix::identity(2);
  CHECK_FALSE(reverify(e1.system, *e1.spec, bad2, &why));
}

TEST_CASE("phi matches the selected index inside each ordering cone", "[certify][property]") {
  std::mt19937_64 rng(97);
  const Config c = fixtures::example1();
  int hits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec x = random_vec(rng, 2);
    const Vec v = c.basis->values(x);
    if (!strictly_ordered(v)) continue;
    const int sel = selected_index(*c.spec, v);
    REQUIRE(sel == phi(*c.spec, ordering(v)));
    ++hits;
  }
  CHECK(hits > 900);
}

TEST_CASE("negative margins imply decrease on the sampled cone pieces", "[certify][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(101);
  for (const Config& c : {fixtures::example1(), fixtures::example3()}) {
    const Candidate cand = c.system.dim() == 2 ? fixtures::example1_candidate() : fixtures::example3_candidate();
    const ConditionIReport r = check_condition_i(c.system, *c.spec, cand, pol);
    REQUIRE(r.pass);
    for (const auto& pair : r.pairs) {
      if (pair.vacuous || !(pair.margin < 0.0)) continue;
      const Mat& A = *c.system.mode(pair.mode).A;
      const SymMatrix form = lyap_form(A, cand.P[pair.phi - 1]);
      int inside = 0;
      for (int trial = 0; trial < 200000 && inside < 1000; ++trial) {
        const Vec x = random_vec(rng, c.system.dim());
        if (c.system.region_value(pair.mode, x) <= 0.0) continue;
        Vec v(cand.P.size());
        for (std::size_t k = 0; k < cand.P.size(); ++k) v[k] = cand.P[k].quad(x);
        if (!strictly_ordered(v) || ordering(v) != pair.rho) continue;
        REQUIRE(form.quad(x) < 0.0);
        ++inside;
      }
      CHECK(inside > 0);
    }
  }
}

TEST_CASE("S-procedure emptiness certificates are sound", "[certify][property]") {
  NumericPolicy pol;
  std::mt19937_64 rng(103);
  int certified = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<SymMatrix> gens;
    for (int k = 0; k < 2 + trial % 2; ++k) gens.push_back(random_sym(rng, 3));
    const ConeEmptiness e = cone_intersection_empty(gens, pol);
    if (e.empty) {
      ++certified;
      REQUIRE(e.method == ConeEmptiness::Method::SProcedure);
      for (int s = 0; s < 20000; ++s) {
        const Vec x = random_unit(rng, 3);
        bool all = true;
        for (const auto& g : gens) all = all && g.quad(x) > 1e-9;
        REQUIRE_FALSE(all);
      }
    } else if (e.method == ConeEmptiness::Method::Witness) {
      for (const auto& g : gens) REQUIRE(g.quad(e.witness) > 0.0);
    }
  }
  CHECK(certified > 0);
}
