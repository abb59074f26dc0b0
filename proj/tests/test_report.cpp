#include <catch2/catch_amalgamated.hpp>

#include "mmlyap/fixtures.hpp"
#include "mmlyap/report.hpp"
#include "mmlyap/svg.hpp"
#include "support.hpp"

#include <cmath>

using namespace mmlyap;
using namespace testing;
using Catch::Approx;

TEST_CASE("FNV-1a reference values", "[report]") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("output header records version, manifest hash and seed", "[report]") {
  const std::string h = output_header("abc", 42);
  CHECK(h.rfind("# mmlyap " MMLYAP_VERSION " manifest=", 0) == 0);
  CHECK(h.find("seed=42") != std::string::npos);
  CHECK(h.find("manifest=e71fa2190541574b") != std::string::npos);
  CHECK(output_header("abc", 42, "// ").rfind("// mmlyap", 0) == 0);
}

TEST_CASE("phi report prints the table", "[report]") {
  const Report r = report_phi(fixtures::example1());
  CHECK(r.ok);
  CHECK(r.text.find("table = (3,3,3,3,1,2)") != std::string::npos);
}

TEST_CASE("reproductions are deterministic and pass", "[report]") {
  NumericPolicy pol;
  for (const char* name : {"example1", "example2", "example3"}) {
    const Report a = reproduce(name, pol);
    const Report b = reproduce(name, pol);
    CHECK(a.ok);
    CHECK(a.text == b.text);
  }
  CHECK_THROWS(reproduce("example9", pol));
}

TEST_CASE("decrease sample points include every switching direction", "[report]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  const auto pts = decrease_points(c, 64, pol);
  const Vec v1 = example1_v1();
  bool has_v1 = false;
  for (const auto& p : pts) {
    CHECK(p.norm() == Approx(1.0));
    if ((p - v1).norm() < 1e-12 || (p + v1).norm() < 1e-12) has_v1 = true;
  }
  CHECK(has_v1);
}

TEST_CASE("Clarke mode flags the shield lines, Lie mode does not", "[report]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  CHECK(report_decrease(c, 360, false, 0.0, pol).ok);
  CHECK_FALSE(report_decrease(c, 360, true, 0.0, pol).ok);
}

TEST_CASE("certificate text parses back", "[report]") {
  NumericPolicy pol;
  const Config c = fixtures::example1();
  const Certificate cert = certify(c.system, *c.spec, fixtures::example1_candidate(), CertifyOptions{}, pol);
  const Config back = parse_config(certificate_text(c, cert));
  REQUIRE(back.basis.has_value());
  CHECK(back.basis->size() == 3);
  bool verdict = false;
  for (const auto& [k, v] : back.report)
    if (k == "verdict") verdict = v == "GAS-certified";
  CHECK(verdict);
}

TEST_CASE("contour of a circle", "[report]") {
  const auto segs = contour([](double x, double y) { return x * x + y * y; }, -2, 2, 101, 1.0);
  REQUIRE(segs.size() > 50);
  for (const auto& s : segs) {
    CHECK(std::hypot(s.x0, s.y0) == Approx(1.0).margin(2e-3));
    CHECK(std::hypot(s.x1, s.y1) == Approx(1.0).margin(2e-3));
  }
}

TEST_CASE("phase portrait SVG", "[report]") {
  const Config c = fixtures::example1();
  SimOptions o;
  o.horizon = 3.0;
  const Trajectory t = simulate(c.system, fixtures::example1_z0(), o);
  SvgOptions so;
  so.grid = 80;
  const std::string svg = phase_portrait_svg(c, {t}, so, "mmlyap test");
  CHECK(svg.rfind("<!-- mmlyap test -->", 0) == 0);
  CHECK(svg.find("class=\"trajectory\"") != std::string::npos);
  CHECK(svg.find("class=\"level\"") != std::string::npos);
  CHECK(svg.find("class=\"boundary\"") != std::string::npos);
  CHECK_THROWS(phase_portrait_svg(fixtures::example3(), {}, so, ""));
}
