#include "mmlyap/report.hpp"

#include "mmlyap/errors.hpp"
#include "mmlyap/fixtures.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#ifndef MMLYAP_VERSION
#define MMLYAP_VERSION "0.0.0"
#endif

namespace mmlyap {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string ints(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

// Accumulates "key = value" lines.
class Lines {
 public:
  void section(const std::string& name) { os_ << (os_.tellp() > 0 ? "\n[" : "[") << name << "]\n"; }
  template <class T>
  void put(const std::string& key, const T& v) {
    os_ << key << " = " << v << "\n";
  }
  void put(const std::string& key, double v) { os_ << key << " = " << num(v) << "\n"; }
  void put(const std::string& key, bool v) { os_ << key << " = " << (v ? "true" : "false") << "\n"; }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

const MaxMinSpec& need_spec(const Config& cfg) {
  if (!cfg.spec) throw PreconditionError("configuration has no [structure] section");
  return *cfg.spec;
}

const Basis& need_basis(const Config& cfg) {
  if (!cfg.basis) throw PreconditionError("configuration has no [basis] section");
  return *cfg.basis;
}

void require_point(const Config& cfg, const Vec& x) {
  if (x.size() != cfg.system.dim())
    throw InvalidInput("point has " + std::to_string(x.size()) + " coordinates, system has dimension " +
                       std::to_string(cfg.system.dim()));
  require_finite(x, "point");
}

void put_lie(Lines& out, const std::string& key, const LieSet& l) {
  if (l.empty) out.put(key, std::string("empty"));
  else out.put(key, "[" + num(l.lo) + ", " + num(l.hi) + "]");
}

// Zero directions on the unit circle of a 2x2 form, as angles in [0, 2 pi).
void circle_zeros(const Mat& g, std::vector<double>& out) {
  const double m = 0.5 * (g(0, 0) + g(1, 1));
  const double a = 0.5 * (g(0, 0) - g(1, 1));
  const double b = g(0, 1);
  const double r = std::hypot(a, b);
  if (r == 0.0 || std::abs(m) > r) return;
  const double psi = std::atan2(b, a);
  const double w = std::acos(std::clamp(-m / r, -1.0, 1.0));
  for (double t : {psi + w, psi - w}) {
    double p = std::fmod(0.5 * t, kPi);
    if (p < 0) p += kPi;
    out.push_back(p);
    out.push_back(p + kPi);
  }
}

Candidate candidate_of(const Config& cfg) {
  const Basis& b = need_basis(cfg);
  if (!b.is_quadratic()) throw PreconditionError("certification needs a quadratic basis");
  return {b.matrices(), cfg.multipliers};
}

void put_condition_i(Lines& out, const ConditionIReport& r) {
  out.put("pass", r.pass);
  out.put("worst", r.worst);
  out.put("inequalities", static_cast<int>(r.inequalities.size()));
  for (const auto& p : r.pairs) {
    const std::string key = "pair " + std::to_string(p.mode) + " " + permutation_text(p.rho);
    if (p.vacuous)
      out.put(key, std::string("vacuous (") + method_name(p.emptiness.method) + ", " +
                       num(p.emptiness.certificate_value) + ")");
    else
      out.put(key, "phi " + std::to_string(p.phi) + " margin " + num(p.margin) + " inequality " +
                       std::to_string(p.inequality + 1));
  }
  for (std::size_t q = 0; q < r.inequalities.size(); ++q) out.put("inequality " + std::to_string(q + 1), r.inequalities[q].margin);
}

void put_planar(Lines& out, const PlanarReport& p) {
  out.put("chain", ints(p.chain.modes));
  out.put("wrap", p.chain.wrap);
  out.put("reconstruction", p.chain.reconstruction);
  for (std::size_t k = 0; k < p.chain.theta.size(); ++k) out.put("theta" + std::to_string(k + 1), vector_text(p.chain.theta[k]));
  for (const auto& pt : p.points) {
    std::string s = "v " + vector_text(pt.v) + " modes " + std::to_string(pt.mode_prev) + "," + std::to_string(pt.mode) +
                    " active " + ints(pt.active);
    if (pt.active.size() > 1) {
      s += " lambda ";
      s += kind_name(pt.lambda.kind);
      if (pt.value) s += " value " + num(*pt.value);
    } else {
      s += " single-valued";
    }
    s += pt.pass ? " pass" : " FAIL";
    out.put("point " + std::to_string(pt.k), s);
  }
  out.put("pass", p.pass);
}

void put_two_mode(Lines& out, const TwoModeReport& t) {
  out.put("exclusion_samples", t.exclusion.samples);
  out.put("exclusion_min_product", t.exclusion.min_product);
  if (t.exclusion.argmin.size() > 0) out.put("exclusion_argmin", vector_text(t.exclusion.argmin));
  out.put("exclusion_pass", t.exclusion.pass);
  out.put("rank_margin", t.rank_margin);
  out.put("rank_pass", t.rank_pass);
  out.put("pass", t.pass);
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string output_header(const std::string& manifest, std::uint64_t seed, const std::string& prefix) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "mmlyap %s manifest=%016" PRIx64 " seed=%" PRIu64, MMLYAP_VERSION, fnv1a(manifest),
                seed);
  return prefix + buf;
}

Report report_validate(const Config& cfg, const NumericPolicy& policy) {
  Lines out;
  Report r;
  const SwitchedSystem& sys = cfg.system;
  out.section("system");
  out.put("dim", sys.dim());
  out.put("modes", sys.size());
  out.put("linear", sys.is_linear());
  out.put("conic", sys.is_conic());
  if (sys.size() > 1) {
    const PartitionReport p = check_partition(sys, 2000, policy);
    out.put("partition_samples", p.samples);
    out.put("partition_overlaps", p.overlaps);
    out.put("partition_gaps", p.gaps);
    for (std::size_t k = 0; k < p.messages.size() && k < 10; ++k) out.put("partition_note", p.messages[k]);
    r.ok = p.ok();
  }
  if (cfg.basis) {
    out.section("basis");
    out.put("K", cfg.basis->size());
    out.put("quadratic", cfg.basis->is_quadratic());
  }
  if (cfg.spec) {
    out.section("structure");
    out.put("function", cfg.spec->str());
    if (cfg.basis && cfg.basis->size() != cfg.spec->K) {
      out.put("error", std::string("basis size differs from K"));
      r.ok = false;
    }
  }
  out.section("result");
  out.put("valid", r.ok);
  r.text = out.str();
  return r;
}

Report report_phi(const Config& cfg) {
  const MaxMinSpec& in = need_spec(cfg);
  const MaxMinSpec spec = in.polarity == Polarity::MaxMin ? in : dualize(in);
  Lines out;
  out.section("phi");
  out.put("function", spec.str());
  if (spec.K > 6) throw PreconditionError("phi table refused for K > 6");
  std::string table;
  for (const auto& rho : all_permutations(spec.K)) {
    const int p = phi(spec, rho);
    out.put("phi " + permutation_text(rho), p);
    table += (table.empty() ? "" : ",") + std::to_string(p);
  }
  out.put("table", "(" + table + ")");
  return {out.str(), true};
}

Report report_grad(const Config& cfg, const Vec& x, const NumericPolicy& policy) {
  require_point(cfg, x);
  const MaxMinSpec& spec = need_spec(cfg);
  const Basis& basis = need_basis(cfg);
  Lines out;
  out.section("gradient");
  out.put("x", vector_text(x));
  out.put("V", eval(spec, basis, x));
  const ActiveSet a = active_indices(spec, basis, x, policy);
  out.put("active", ints(a.indices));
  out.put("method", std::string(method_name(a.method)));
  for (const auto& w : a.warnings) out.put("warning", w);
  for (int l : a.indices) out.put("grad V" + std::to_string(l), vector_text(basis.grad(l, x)));
  out.put("differentiable", a.indices.size() == 1);
  return {out.str(), true};
}

Report report_lie(const Config& cfg, const Vec& x, const NumericPolicy& policy) {
  require_point(cfg, x);
  const MaxMinSpec& spec = need_spec(cfg);
  const Basis& basis = need_basis(cfg);
  Lines out;
  out.section("lie");
  out.put("x", vector_text(x));
  const FilippovSet f = filippov_set(cfg.system, x, policy);
  const GradientHull h = clarke_gradient(spec, basis, x, policy);
  out.put("modes", ints(f.indices));
  for (std::size_t k = 0; k < f.indices.size(); ++k) out.put("f" + std::to_string(f.indices[k]), vector_text(f.vertices[k]));
  out.put("active", ints(h.indices));
  const SimplexSet lam = lambda_set(h.vertices, f.vertices, policy);
  out.put("lambda", std::string(kind_name(lam.kind)));
  for (std::size_t k = 0; k < lam.vertices.size(); ++k) out.put("lambda vertex " + std::to_string(k + 1), vector_text(lam.vertices[k]));
  const LieSet l = lie_set(h.vertices, f.vertices, policy);
  put_lie(out, "lie", l);
  const ClarkeSet c = clarke_set(h.vertices, f.vertices);
  out.put("clarke", "[" + num(c.lo) + ", " + num(c.hi) + "]");
  return {out.str(), true};
}

std::vector<Vec> decrease_points(const Config& cfg, int samples, const NumericPolicy& policy) {
  if (samples <= 0) throw InvalidInput("samples must be positive");
  const int n = cfg.system.dim();
  std::vector<Vec> pts;
  if (n == 2) {
    std::vector<double> ang;
    for (int k = 0; k < samples; ++k) ang.push_back(2.0 * kPi * k / samples);
    // Switching lines and kinks of V are where the interesting cases live.
    for (const auto& m : cfg.system.modes())
      if (m.region == Mode::Region::Cone) circle_zeros(m.Q->mat(), ang);
    if (cfg.basis && cfg.basis->is_quadratic())
      for (int a = 1; a <= cfg.basis->size(); ++a)
        for (int b = a + 1; b <= cfg.basis->size(); ++b)
          circle_zeros((cfg.basis->P(a) - cfg.basis->P(b)).mat(), ang);
    for (double t : ang) {
      Vec x(2);
      x << std::cos(t), std::sin(t);
      pts.push_back(x);
    }
    return pts;
  }
  std::mt19937_64 rng(policy.seed);
  std::normal_distribution<double> normal;
  while (static_cast<int>(pts.size()) < samples) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x[k] = normal(rng);
    if (x.norm() > 0.0) pts.push_back(x / x.norm());
  }
  return pts;
}

Report report_decrease(const Config& cfg, int samples, bool clarke, double rate, const NumericPolicy& policy) {
  const MaxMinSpec& spec = need_spec(cfg);
  const Basis& basis = need_basis(cfg);
  const auto pts = decrease_points(cfg, samples, policy);
  const DecreaseReport d = decrease_check(spec, basis, cfg.system, pts, rate, clarke, policy);
  Lines out;
  out.section("decrease");
  out.put("derivative", std::string(clarke ? "clarke" : "lie"));
  out.put("rate", rate);
  out.put("points", static_cast<int>(d.points.size()));
  out.put("violations", d.violations);
  out.put("note", d.note);
  int listed = 0;
  for (const auto& p : d.points) {
    if (!p.violated) continue;
    if (++listed > 50) break;
    out.put("violation " + std::to_string(listed),
            "x " + vector_text(p.x) + " max " + (p.value ? num(*p.value) : std::string("-inf")) + " bound " + num(p.bound));
  }
  return {out.str(), d.violations == 0};
}

Report report_simulate(const Config& cfg, const Trajectory& traj) {
  Lines out;
  out.section("simulate");
  out.put("dim", cfg.system.dim());
  out.put("status", std::string(status_name(traj.status)));
  if (!traj.message.empty()) out.put("message", traj.message);
  out.put("samples", static_cast<int>(traj.samples.size()));
  if (!traj.samples.empty()) {
    out.put("t_end", traj.samples.back().t);
    out.put("x_end", vector_text(traj.samples.back().x));
    out.put("regime_end", traj.samples.back().regime.str());
  }
  int k = 0;
  for (const auto& e : traj.events) {
    const char* kind = e.kind == TrajectoryEvent::Kind::Crossing ? "crossing"
                       : e.kind == TrajectoryEvent::Kind::SlideStart ? "slide-start"
                                                                    : "slide-end";
    out.put("event " + std::to_string(++k), std::string(kind) + " t " + num(e.t) + " " + e.from.str() + " -> " +
                                                e.to.str() + " x " + vector_text(e.x));
  }
  for (const auto& w : traj.warnings) out.put("warning", w);
  return {out.str(), traj.status == Trajectory::Status::Completed};
}

Report report_decompose(const Config& cfg, const NumericPolicy& policy) {
  const SwitchedSystem& sys = cfg.system;
  if (sys.dim() != 2) throw PreconditionError("decompose: planar systems only");
  if (!sys.is_conic()) throw PreconditionError("decompose: regions must be cones");
  Lines out;
  Report r;
  for (int i = 1; i <= sys.size(); ++i) {
    out.section("mode " + std::to_string(i));
    const SymMatrix& q = *sys.mode(i).Q;
    const auto [t1, t2] = q_cone_decompose(q);
    const Mat rec = t1 * t2.transpose() + t2 * t1.transpose();
    const double err = (rec - q.mat()).norm() / q.mat().norm();
    out.put("theta1", vector_text(t1));
    out.put("theta2", vector_text(t2));
    out.put("reconstruction", err);
    r.ok = r.ok && err <= 1e-8;
  }
  out.section("chain");
  try {
    const ConeChain ch = cone_chain(sys, policy);
    out.put("order", ints(ch.modes));
    out.put("wrap", ch.wrap);
    out.put("reconstruction", ch.reconstruction);
    for (std::size_t k = 0; k < ch.theta.size(); ++k) {
      out.put("theta" + std::to_string(k + 1), vector_text(ch.theta[k]));
      out.put("v" + std::to_string(k + 1), vector_text(ch.v[k]));
    }
  } catch (const InvalidInput& e) {
    out.put("error", std::string(e.what()));
    r.ok = false;
  }
  r.text = out.str();
  return r;
}

std::string certificate_text(const Config& cfg, const Certificate& cert) {
  Config out = cfg;
  if (!cert.candidate.P.empty()) out.basis = Basis::quadratic(cert.candidate.P);
  out.multipliers = cert.candidate.multipliers;
  auto& rep = out.report;
  rep.clear();
  auto put = [&](const std::string& k, const std::string& v) { rep.push_back({k, v}); };
  put("verdict", verdict_name(cert.verdict));
  put("policy.abs", num(cert.policy.abs));
  put("policy.rel", num(cert.policy.rel));
  put("policy.margin", num(cert.policy.margin));
  put("policy.seed", std::to_string(cert.policy.seed));
  put("condition_i.pass", cert.condition_i.pass ? "true" : "false");
  put("condition_i.worst", num(cert.condition_i.worst));
  for (const auto& p : cert.condition_i.pairs) {
    const std::string key = "condition_i.pair " + std::to_string(p.mode) + " " + permutation_text(p.rho);
    if (p.vacuous)
      put(key, std::string("vacuous ") + method_name(p.emptiness.method) + " " + num(p.emptiness.certificate_value));
    else
      put(key, "phi " + std::to_string(p.phi) + " margin " + num(p.margin) + " inequality " + std::to_string(p.inequality + 1));
  }
  for (std::size_t q = 0; q < cert.condition_i.inequalities.size(); ++q)
    put("condition_i.inequality " + std::to_string(q + 1), num(cert.condition_i.inequalities[q].margin));
  put("condition_ii.note", cert.condition_ii_note);
  if (cert.planar) {
    const auto& p = *cert.planar;
    put("planar.chain", ints(p.chain.modes));
    put("planar.wrap", std::to_string(p.chain.wrap));
    for (std::size_t k = 0; k < p.chain.theta.size(); ++k)
      put("planar.theta" + std::to_string(k + 1), vector_text(p.chain.theta[k]));
    for (const auto& pt : p.points) {
      std::string s = "v " + vector_text(pt.v) + " modes " + std::to_string(pt.mode_prev) + "," +
                      std::to_string(pt.mode) + " active " + ints(pt.active);
      if (pt.active.size() > 1) s += std::string(" lambda ") + kind_name(pt.lambda.kind);
      if (pt.value) s += " value " + num(*pt.value);
      put("planar.point " + std::to_string(pt.k), s + (pt.pass ? " pass" : " fail"));
    }
    put("planar.pass", p.pass ? "true" : "false");
  }
  if (cert.two_mode) {
    const auto& t = *cert.two_mode;
    put("two_mode.exclusion", "sampled N=" + std::to_string(t.exclusion.samples) + " margin=" + num(cert.policy.margin) +
                                  " min_product=" + num(t.exclusion.min_product));
    put("two_mode.rank_margin", num(t.rank_margin));
    put("two_mode.pass", t.pass ? "true" : "false");
  }
  if (cert.search) {
    const auto& s = *cert.search;
    put("search.found", s.found ? "true" : "false");
    put("search.objective", num(s.best_objective));
    put("search.evaluations", std::to_string(s.evaluations));
    put("search.starts", std::to_string(s.starts_used));
    put("search.note", s.note);
  }
  return to_text(out);
}

Report report_certify(const Config& cfg, const CertifyOptions& opts, const NumericPolicy& policy) {
  const MaxMinSpec& spec = need_spec(cfg);
  std::optional<Candidate> cand;
  if (!opts.search) cand = candidate_of(cfg);
  const Certificate cert = certify(cfg.system, spec, cand, opts, policy);
  std::string why;
  if (cert.verdict == Verdict::GasCertified && !reverify(cfg.system, spec, cert, &why))
    throw InternalError("certificate failed re-verification: " + why);
  return {certificate_text(cfg, cert), cert.verdict == Verdict::GasCertified};
}

HalfTurn example1_half_turn() {
  const Config cfg = fixtures::example1();
  SimOptions o;
  o.horizon = 5.0;
  o.max_crossings = 3;
  const Trajectory t = simulate(cfg.system, fixtures::example1_z0(), o);
  HalfTurn h;
  for (const auto& e : t.events)
    if (e.kind == TrajectoryEvent::Kind::Crossing) h.times.push_back(e.t), h.points.push_back(e.x);
  if (h.points.size() < 3) throw InternalError("half turn did not complete three crossings");
  h.norm_z3 = h.points[2].norm();
  h.beta = h.norm_z3 / fixtures::example1_z0().norm();
  return h;
}

Report reproduce(const std::string& name, const NumericPolicy& policy) {
  Lines out;
  Report r;
  if (name == "example1") {
    const Config cfg = fixtures::example1();
    const MaxMinSpec& spec = *cfg.spec;
    const HalfTurn h = example1_half_turn();
    out.section("trajectory");
    out.put("z0", vector_text(fixtures::example1_z0()));
    for (int k = 0; k < 3; ++k) {
      out.put("t" + std::to_string(k + 1), h.times[k]);
      out.put("z" + std::to_string(k + 1), vector_text(h.points[k]));
    }
    out.put("norm_z3", h.norm_z3);
    out.put("beta", h.beta);

    out.section("phi");
    std::string table;
    for (const auto& rho : all_permutations(spec.K)) table += (table.empty() ? "" : ",") + std::to_string(phi(spec, rho));
    out.put("table", "(" + table + ")");

    const Candidate cand = fixtures::example1_candidate();
    const Certificate cert = certify(cfg.system, spec, cand, CertifyOptions{}, policy);
    out.section("condition i");
    put_condition_i(out, cert.condition_i);
    if (cert.planar) {
      out.section("condition ii");
      put_planar(out, *cert.planar);
    }

    // Clarke's derivative is positive on S13 even though the Lie derivative is empty there.
    out.section("clarke witness");
    Vec v1(2);
    v1 << 1.0, -(1.0 + std::sqrt(2.0));
    v1.normalize();
    const Mat& A1 = *cfg.system.mode(1).A;
    const SymMatrix& P3 = cfg.basis->P(3);
    out.put("v1", vector_text(v1));
    out.put("v1' (P3 A1 + A1' P3) v1", lyap_form(A1, P3).quad(v1));
    const auto lie = decrease_check(spec, *cfg.basis, cfg.system, {v1}, 0.0, false, policy);
    const auto cl = decrease_check(spec, *cfg.basis, cfg.system, {v1}, 0.0, true, policy);
    out.put("lie violation at v1", lie.violations > 0);
    out.put("clarke violation at v1", cl.violations > 0);

    out.section("result");
    out.put("verdict", std::string(verdict_name(cert.verdict)));
    r.ok = cert.verdict == Verdict::GasCertified;
  } else if (name == "example2") {
    const double b = 10.0;
    const Config cfg = fixtures::example2(b);
    const MaxMinSpec& spec = *cfg.spec;
    out.section("sliding");
    out.put("b", b);
    double lam_err = 0.0;
    double s1_worst = -1e300, s2_small = -1e300, s2_large = -1e300;
    // S1 at radii 0.1..10, S2 near the origin (|x| <= 0.1) and far out
    // (|x| from 10 to about 1e3, geometric), each with both signs.
    auto ray = [](double rad, double sgn, double dir) {
      Vec x(2);
      x << sgn * rad / std::sqrt(2.0), dir * sgn * rad / std::sqrt(2.0);
      return x;
    };
    auto lie_hi = [&](const Vec& x, double& worst) {
      const auto lam = sliding_lambda(cfg.system, x, 1, policy);
      lam_err = std::max(lam_err, lam ? std::abs(*lam - 0.5) : 1.0);
      const LieSet l = lie_derivative(spec, *cfg.basis, cfg.system, x, policy);
      if (!l.empty) worst = std::max(worst, l.hi / x.squaredNorm());
    };
    for (int k = 1; k <= 100; ++k) {
      for (double sgn : {1.0, -1.0}) {
        lie_hi(ray(0.1 * k, sgn, 1.0), s1_worst);
        lie_hi(ray(0.001 * k, sgn, -1.0), s2_small);
        if (k <= 50) lie_hi(ray(10.0 * std::pow(1.1, k - 1), sgn, -1.0), s2_large);
      }
    }
    out.put("max |lambda - 0.5| on S1 and S2", lam_err);
    out.section("lie");
    out.put("max lie / |x|^2 on S1", s1_worst);
    out.put("max lie / |x|^2 on S2, |x| <= 0.1", s2_small);
    out.put("max lie / |x|^2 on S2, |x| >= 10", s2_large);
    const bool ok = lam_err <= 1e-9 && s1_worst < -12.5 && s2_small < 0.0 && s2_large > 0.0;
    out.section("result");
    out.put("local only", ok);
    r.ok = ok;
  } else if (name == "example3") {
    const Config cfg = fixtures::example3();
    const Certificate cert = certify(cfg.system, *cfg.spec, fixtures::example3_candidate(), CertifyOptions{}, policy);
    out.section("condition i");
    put_condition_i(out, cert.condition_i);
    if (cert.two_mode) {
      out.section("condition ii");
      put_two_mode(out, *cert.two_mode);
    }
    out.section("result");
    out.put("verdict", std::string(verdict_name(cert.verdict)));
    r.ok = cert.verdict == Verdict::GasCertified;
  } else {
    throw InvalidInput("unknown example '" + name + "' (expected example1, example2 or example3)");
  }
  r.text = out.str();
  return r;
}

}  // namespace mmlyap
