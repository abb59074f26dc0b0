#include "mmlyap/certify.hpp"

#include "certify_detail.hpp"
#include "mmlyap/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace mmlyap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double circle_value(const Mat& g, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return g(0, 0) * c * c + 2.0 * g(0, 1) * c * s + g(1, 1) * s * s;
}

// Roots in [0, pi) of phi -> u^T G u.
void circle_roots(const Mat& g, std::vector<double>& out) {
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
  }
}

double golden(const std::function<double(double)>& f, double lo, double hi, int iters, double& best_x) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  // The endpoints matter: optimal multipliers are often exactly zero.
  double bx = c, bf = fc;
  if (fd < bf) bx = d, bf = fd;
  const double flo = f(lo);
  if (flo <= bf) bx = lo, bf = flo;
  best_x = bx;
  return bf;
}

MaxMinSpec maxmin_form(const MaxMinSpec& spec) {
  spec.validate();
  return spec.polarity == Polarity::MaxMin ? spec : dualize(spec);
}

void require_certifiable(const SwitchedSystem& sys, const char* what) {
  if (!sys.is_linear()) throw PreconditionError(std::string(what) + ": system must be linear");
  if (sys.size() > 1 && !sys.is_conic())
    throw PreconditionError(std::string(what) + ": regions must be cones x^T Q x > 0");
}

void require_candidate(const SwitchedSystem& sys, const MaxMinSpec& spec, const Candidate& c) {
  if (static_cast<int>(c.P.size()) != spec.K)
    throw InvalidInput("candidate has " + std::to_string(c.P.size()) + " matrices, structure needs " +
                       std::to_string(spec.K));
  for (std::size_t k = 0; k < c.P.size(); ++k) {
    if (c.P[k].dim() != sys.dim()) throw InvalidInput("P" + std::to_string(k + 1) + ": dimension mismatch");
    if (!(negdef_margin(-c.P[k]) < 0.0)) throw InvalidInput("P" + std::to_string(k + 1) + " is not positive definite");
  }
  for (const auto& [key, t] : c.multipliers.tau)
    if ((t.array() < 0.0).any()) throw InvalidInput("negative tau multiplier");
  for (const auto& [key, b] : c.multipliers.beta)
    if (b < 0.0) throw InvalidInput("negative beta multiplier");
}

Vec unit_perp(const Vec& t) {
  Vec v(2);
  v << -t[1], t[0];
  return v / v.norm();
}

}  // namespace

// ---------------------------------------------------------------------------

namespace detail {

std::vector<SymMatrix> pair_generators(const SwitchedSystem& sys, const std::vector<SymMatrix>& P, int mode,
                                       const Permutation& rho) {
  std::vector<SymMatrix> g;
  const Mode& m = sys.mode(mode);
  if (m.region == Mode::Region::Cone) g.push_back(*m.Q);
  for (std::size_t k = 0; k + 1 < rho.size(); ++k) g.push_back(P[rho[k + 1] - 1] - P[rho[k] - 1]);
  return g;
}

double lam_max(const Mat& m) {
  if (m.rows() == 1) return m(0, 0);
  if (m.rows() == 2) {
    const double h = 0.5 * (m(0, 0) - m(1, 1));
    return 0.5 * (m(0, 0) + m(1, 1)) + std::hypot(h, 0.5 * (m(0, 1) + m(1, 0)));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double fit_pair(const Mat& m0, const std::vector<Mat>& g, Vec& t, int rounds) {
  const int r = static_cast<int>(g.size());
  t = Vec::Zero(r);
  if (r == 0) return lam_max(m0);
  Vec hi(r);
  const double s0 = m0.norm() + 1.0;
  for (int j = 0; j < r; ++j) {
    const double gn = g[j].norm();
    hi[j] = gn > 0.0 ? 100.0 * s0 / gn : 0.0;
  }
  auto value = [&](const Vec& x) {
    Mat m = m0;
    for (int j = 0; j < r; ++j)
      if (x[j] != 0.0) m += x[j] * g[j];
    return lam_max(m);
  };
  double best = value(t);
  // Line searches along coordinates and pairwise combinations, clipped to the box.
  std::vector<Vec> dirs;
  for (int j = 0; j < r; ++j) dirs.push_back(Vec::Unit(r, j));
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      dirs.push_back(Vec::Unit(r, a) + Vec::Unit(r, b));
      dirs.push_back(Vec::Unit(r, a) - Vec::Unit(r, b));
    }
  for (int round = 0; round < rounds; ++round) {
    const double before = best;
    for (const Vec& d : dirs) {
      double lo = -kInf, up = kInf;
      for (int j = 0; j < r; ++j) {
        if (d[j] > 0) lo = std::max(lo, -t[j] / d[j]), up = std::min(up, (hi[j] - t[j]) / d[j]);
        if (d[j] < 0) lo = std::max(lo, (hi[j] - t[j]) / d[j]), up = std::min(up, -t[j] / d[j]);
      }
      if (!(up > lo)) continue;
      double s = 0.0;
      const double f = golden([&](double u) { return value(t + u * d); }, lo, up, 48, s);
      if (f < best) {
        best = f;
        t += s * d;
        t = t.cwiseMax(0.0).cwiseMin(hi);
      }
    }
    if (before - best <= 1e-13 * (1.0 + std::abs(best))) break;
  }
  return best;
}

double sprocedure_min(const std::vector<Mat>& g, Vec& mu, int iterations) {
  const int r = static_cast<int>(g.size());
  mu = Vec::Constant(r, 1.0 / r);
  auto value = [&](const Vec& w) {
    Mat m = Mat::Zero(g[0].rows(), g[0].cols());
    for (int k = 0; k < r; ++k) m += w[k] * g[k];
    return lam_max(m);
  };
  if (r == 1) return value(mu);
  double best = value(mu);
  for (int it = 0; it < iterations; ++it) {
    const double before = best;
    // Transfer mass between pairs of weights.
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) {
        const double total = mu[a] + mu[b];
        if (total <= 0.0) continue;
        double s = 0.0;
        const double f = golden(
            [&](double u) {
              Vec w = mu;
              w[a] = u, w[b] = total - u;
              return value(w);
            },
            0.0, total, 90, s);
        if (f < best) best = f, mu[a] = s, mu[b] = total - s;
        const double fb = value([&] {
          Vec w = mu;
          w[a] = 0.0, w[b] = total;
          return w;
        }());
        if (fb < best) best = fb, mu[a] = 0.0, mu[b] = total;
      }
    if (before - best <= 1e-15) break;
  }
  return best;
}

double emptiness_score(const std::vector<SymMatrix>& gens, int grid) {
  if (gens.empty()) return 1.0;
  const int n = gens.front().dim();
  std::vector<Mat> g;
  for (const auto& s : gens) {
    const double nm = s.mat().norm();
    g.push_back(nm > 0.0 ? Mat(s.mat() / nm) : s.mat());
  }
  if (n == 1) {
    double m = kInf;
    for (const auto& x : g) m = std::min(m, x(0, 0));
    return m;
  }
  if (n == 2) {
    // Exact: the sign pattern is constant between consecutive roots, so arc midpoints suffice.
    std::vector<double> roots;
    for (const auto& x : g) circle_roots(x, roots);
    std::sort(roots.begin(), roots.end());
    std::vector<double> mids;
    for (std::size_t k = 0; k < roots.size(); ++k)
      mids.push_back(0.5 * (roots[k] + (k + 1 < roots.size() ? roots[k + 1] : roots.front() + kPi)));
    for (int k = 0; k < grid; ++k) mids.push_back(kPi * k / grid);
    double best = -kInf;
    for (double phi : mids) {
      double m = kInf;
      for (const auto& x : g) m = std::min(m, circle_value(x, phi));
      best = std::max(best, m);
    }
    return best;
  }
  Vec mu;
  return sprocedure_min(g, mu, 20);
}

}  // namespace detail

// ---------------------------------------------------------------------------

const char* method_name(ConeEmptiness::Method m) {
  switch (m) {
    case ConeEmptiness::Method::AngularSweep: return "angular-sweep";
    case ConeEmptiness::Method::SProcedure: return "s-procedure";
    case ConeEmptiness::Method::Witness: return "witness";
    case ConeEmptiness::Method::Inconclusive: return "inconclusive";
  }
  return "?";
}

ConeEmptiness cone_intersection_empty(const std::vector<SymMatrix>& generators, const NumericPolicy& policy) {
  ConeEmptiness r;
  if (generators.empty()) {
    r.method = ConeEmptiness::Method::Witness;
    return r;
  }
  const int n = generators.front().dim();
  // Points whose every normalized form is below this count as boundary, not interior.
  const double thin = policy.abs + policy.rel;
  std::vector<Mat> g;
  for (const auto& s : generators) {
    if (s.dim() != n) throw InvalidInput("cone_intersection_empty: dimension mismatch");
    const double nm = s.mat().norm();
    // A vanishing form holds everywhere and constrains nothing.
    if (nm > policy.abs) g.push_back(s.mat() / nm);
  }
  if (g.empty()) {
    r.method = ConeEmptiness::Method::Witness;
    r.witness = Vec::Unit(n, 0);
    return r;
  }
  auto score = [&](const Vec& x) {
    const double xx = x.squaredNorm();
    double m = kInf;
    for (const auto& h : g) m = std::min(m, x.dot(h * x) / xx);
    return m;
  };

  if (n == 1) {
    Vec x = Vec::Ones(1);
    r.certificate_value = score(x);
    r.empty = !(r.certificate_value > thin);
    r.method = ConeEmptiness::Method::AngularSweep;
    if (!r.empty) r.witness = x;
    return r;
  }

  if (n == 2) {
    std::vector<double> roots;
    for (const auto& h : g) circle_roots(h, roots);
    std::sort(roots.begin(), roots.end());
    std::vector<double> mids;
    if (roots.empty()) {
      mids.push_back(0.0);
    } else {
      for (std::size_t k = 0; k < roots.size(); ++k) {
        const double a = roots[k];
        const double b = k + 1 < roots.size() ? roots[k + 1] : roots.front() + kPi;
        mids.push_back(0.5 * (a + b));
      }
    }
    r.method = ConeEmptiness::Method::AngularSweep;
    r.empty = true;
    r.certificate_value = -kInf;
    for (double phi : mids) {
      Vec u(2);
      u << std::cos(phi), std::sin(phi);
      const double s = score(u);
      if (s > r.certificate_value) {
        r.certificate_value = s;
        if (s > thin) r.empty = false, r.witness = u;
      }
    }
    return r;
  }

  Vec mu;
  const double cert = detail::sprocedure_min(g, mu, 60);
  if (cert <= thin) {
    r.empty = true;
    r.method = ConeEmptiness::Method::SProcedure;
    r.mu = mu;
    r.certificate_value = cert;
    return r;
  }
  r.certificate_value = cert;
  // Look for an interior point: the top eigenvector of the best combination, then random directions.
  Mat combo = Mat::Zero(n, n);
  for (std::size_t k = 0; k < g.size(); ++k) combo += mu[k] * g[k];
  Eigen::SelfAdjointEigenSolver<Mat> es(combo);
  std::vector<Vec> tries = {es.eigenvectors().col(n - 1)};
  std::mt19937_64 rng(policy.seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < 20000; ++s) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x[k] = normal(rng);
    tries.push_back(x);
  }
  for (const Vec& x : tries) {
    if (x.norm() == 0.0) continue;
    if (score(x) > thin) {
      r.empty = false;
      r.method = ConeEmptiness::Method::Witness;
      r.witness = x / x.norm();
      return r;
    }
  }
  r.empty = false;
  r.method = ConeEmptiness::Method::Inconclusive;
  return r;
}

// ---------------------------------------------------------------------------

SymMatrix condition_i_matrix(const SwitchedSystem& sys, const Candidate& c, int mode, const Permutation& rho,
                             int phi_index, const Vec& tau, double beta) {
  const Mode& m = sys.mode(mode);
  SymMatrix out = lyap_form(*m.A, c.P.at(phi_index - 1));
  for (std::size_t k = 0; k + 1 < rho.size(); ++k)
    if (tau[k] != 0.0) out = out + tau[k] * (c.P[rho[k + 1] - 1] - c.P[rho[k] - 1]);
  if (beta != 0.0 && m.region == Mode::Region::Cone) out = out + beta * *m.Q;
  return out;
}

ConditionIReport check_condition_i(const SwitchedSystem& sys, const MaxMinSpec& spec_in, const Candidate& cand,
                                   const NumericPolicy& policy) {
  require_certifiable(sys, "check_condition_i");
  const MaxMinSpec spec = maxmin_form(spec_in);
  if (spec.K > 6) throw PreconditionError("check_condition_i: K > 6 permutations refused (K! grows too fast)");
  require_candidate(sys, spec, cand);

  ConditionIReport rep;
  const auto perms = all_permutations(spec.K);
  for (int i = 1; i <= sys.size(); ++i) {
    for (const auto& rho : perms) {
      PairMargin pm;
      pm.mode = i;
      pm.rho = rho;
      pm.phi = phi(spec, rho);
      pm.emptiness = cone_intersection_empty(detail::pair_generators(sys, cand.P, i, rho), policy);
      pm.vacuous = pm.emptiness.empty;
      pm.inequality = -1;
      if (!pm.vacuous) {
        Vec tau = cand.multipliers.tau_of(i, rho);
        if (tau.size() != spec.K - 1) throw InvalidInput("tau has the wrong length");
        const SymMatrix m = condition_i_matrix(sys, cand, i, rho, pm.phi, tau, cand.multipliers.beta_of(i, rho));
        pm.margin = negdef_margin(m);
        const double scale = 1.0 + m.mat().norm();
        int found = -1;
        for (std::size_t q = 0; q < rep.inequalities.size(); ++q)
          if ((rep.inequalities[q].matrix.mat() - m.mat()).norm() <= 1e-12 * scale) {
            found = static_cast<int>(q);
            break;
          }
        if (found < 0) {
          rep.inequalities.push_back({m, pm.margin, {}});
          found = static_cast<int>(rep.inequalities.size()) - 1;
        }
        rep.inequalities[found].pairs.push_back(rep.pairs.size());
        pm.inequality = found;
      }
      rep.pairs.push_back(std::move(pm));
    }
  }
  rep.worst = -kInf;
  for (const auto& q : rep.inequalities) rep.worst = std::max(rep.worst, q.margin);
  rep.pass = rep.worst < -policy.margin;
  return rep;
}

Candidate fit_multipliers(const SwitchedSystem& sys, const MaxMinSpec& spec_in, std::vector<SymMatrix> P,
                          const NumericPolicy& policy) {
  require_certifiable(sys, "fit_multipliers");
  const MaxMinSpec spec = maxmin_form(spec_in);
  Candidate c;
  c.P = std::move(P);
  require_candidate(sys, spec, c);
  for (int i = 1; i <= sys.size(); ++i) {
    const Mode& m = sys.mode(i);
    for (const auto& rho : all_permutations(spec.K)) {
      if (cone_intersection_empty(detail::pair_generators(sys, c.P, i, rho), policy).empty) continue;
      const Mat m0 = lyap_form(*m.A, c.P[phi(spec, rho) - 1]).mat();
      std::vector<Mat> g;
      for (std::size_t k = 0; k + 1 < rho.size(); ++k) g.push_back((c.P[rho[k + 1] - 1] - c.P[rho[k] - 1]).mat());
      const bool cone = m.region == Mode::Region::Cone;
      if (cone) g.push_back(m.Q->mat());
      Vec t;
      detail::fit_pair(m0, g, t, 40);
      Vec tau = t.head(spec.K - 1);
      if (tau.size() > 0 && (tau.array() != 0.0).any()) c.multipliers.tau[{i, rho}] = tau;
      if (cone && t[spec.K - 1] != 0.0) c.multipliers.beta[{i, rho}] = t[spec.K - 1];
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

std::pair<Vec, Vec> q_cone_decompose(const SymMatrix& q) {
  if (q.dim() != 2) throw PreconditionError("q_cone_decompose: matrix must be 2x2");
  const Spectrum sp = eig_sym(q);
  const double lm = sp.values[0], lp = sp.values[1];
  const double scale = std::max(std::abs(lm), std::abs(lp));
  if (!(lm < -1e-12 * scale) || !(lp > 1e-12 * scale))
    throw PreconditionError("q_cone_decompose: matrix is semidefinite");
  const Vec vm = sp.vectors.col(0), vp = sp.vectors.col(1);
  const double eta = std::sqrt(-lm / (lp - lm));
  // kappa^2 = (l+ - l-)/2 makes t1 t2^T + t2 t1^T reproduce both eigenvalues.
  const double kappa = std::sqrt(0.5 * (lp - lm));
  const double c = std::sqrt(1.0 - eta * eta);
  return {kappa * (c * vp - eta * vm), kappa * (c * vp + eta * vm)};
}

ConeChain cone_chain(const SwitchedSystem& sys, const NumericPolicy& policy) {
  (void)policy;
  if (sys.dim() != 2) throw PreconditionError("cone_chain: planar systems only");
  if (!sys.is_conic()) throw PreconditionError("cone_chain: regions must be cones");
  const int M = sys.size();
  if (M < 2) throw PreconditionError("cone_chain: need at least two modes");

  // Each Q_i contributes two lines, stored by the angle of a normal in (-pi/2, pi/2].
  auto line_angle = [](const Vec& t) {
    double a = std::atan2(t[1], t[0]);
    if (a <= -kPi / 2) a += kPi;
    if (a > kPi / 2) a -= kPi;
    return a;
  };
  auto same_line = [](double a, double b) {
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d) <= 1e-7;
  };
  std::vector<double> lines;
  std::vector<std::pair<int, int>> uses(M);
  for (int i = 1; i <= M; ++i) {
    const auto [t1, t2] = q_cone_decompose(*sys.mode(i).Q);
    int ids[2];
    int slot = 0;
    for (const Vec* t : {&t1, &t2}) {
      const double a = line_angle(*t);
      int id = -1;
      for (std::size_t k = 0; k < lines.size(); ++k)
        if (same_line(lines[k], a)) id = static_cast<int>(k);
      if (id < 0) {
        lines.push_back(a);
        id = static_cast<int>(lines.size()) - 1;
      }
      ids[slot++] = id;
    }
    uses[i - 1] = {ids[0], ids[1]};
  }
  const int L = static_cast<int>(lines.size());
  if (L != M) throw InvalidInput("partition inconsistent: " + std::to_string(L) + " switching lines for " +
                                 std::to_string(M) + " regions");
  std::vector<int> count(L, 0);
  for (const auto& [a, b] : uses) ++count[a], ++count[b];
  for (int c : count)
    if (c != 2) throw InvalidInput("partition inconsistent: a switching line does not separate exactly two regions");

  std::vector<int> order(L);
  for (int k = 0; k < L; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lines[a] < lines[b]; });
  std::vector<Vec> unit(L);
  for (int k = 0; k < L; ++k) {
    unit[k] = Vec(2);
    unit[k] << std::cos(lines[k]), std::sin(lines[k]);
  }
  auto sym = [](const Vec& a, const Vec& b) { return Mat(a * b.transpose() + b * a.transpose()); };

  // Consecutive lines bound exactly one region; walk them in angular order.
  std::vector<int> modes(L, 0);
  std::vector<double> coef(L, 0.0);
  std::vector<bool> taken(M, false);
  for (int k = 0; k < L; ++k) {
    const int a = order[k], b = order[(k + 1) % L];
    int pick = -1;
    for (int i = 0; i < M && pick < 0; ++i) {
      const auto [p, q] = uses[i];
      if (!taken[i] && ((p == a && q == b) || (p == b && q == a))) pick = i;
    }
    if (pick < 0) throw InvalidInput("partition inconsistent: adjacent switching lines bound no common region");
    taken[pick] = true;
    modes[k] = pick + 1;
    const Mat S = sym(unit[a], unit[b]);
    coef[k] = (sys.mode(pick + 1).Q->mat().cwiseProduct(S)).sum() / S.squaredNorm();
  }
  // theta_k = r_k u_k with r_k r_{k+1} = coef_k; the cycle closes with the wrap sign that makes the signs consistent.
  double sign_product = 1.0;
  for (int k = 0; k < L; ++k) sign_product *= coef[k] > 0 ? 1.0 : -1.0;
  ConeChain ch;
  ch.modes = modes;
  ch.wrap = sign_product > 0 ? 1 : -1;
  Mat E = Mat::Zero(L, L);
  Vec rhs(L);
  for (int k = 0; k < L; ++k) {
    E(k, k) += 1.0;
    E(k, (k + 1) % L) += 1.0;
    rhs[k] = std::log(std::abs(coef[k]));
  }
  const Vec lg = E.completeOrthogonalDecomposition().solve(rhs);
  double sgn = 1.0;
  for (int k = 0; k < L; ++k) {
    ch.theta.push_back(sgn * std::exp(lg[k]) * unit[order[k]]);
    if (coef[k] < 0) sgn = -sgn;
  }
  double err = 0.0;
  for (int k = 0; k < L; ++k) {
    const Vec next = (k + 1 < L) ? ch.theta[k + 1] : Vec(ch.wrap * ch.theta[0]);
    const Mat& q = sys.mode(modes[k]).Q->mat();
    err = std::max(err, (q - sym(ch.theta[k], next)).norm() / q.norm());
  }
  if (err > 1e-8)
    throw InvalidInput("partition inconsistent: cone chain reconstruction error " + std::to_string(err));
  ch.reconstruction = err;
  for (const Vec& t : ch.theta) ch.v.push_back(unit_perp(t));
  return ch;
}

PlanarReport planar_condition_ii(const SwitchedSystem& sys, const MaxMinSpec& spec_in, const Candidate& cand,
                                 const NumericPolicy& policy) {
  require_certifiable(sys, "planar_condition_ii");
  if (sys.dim() != 2) throw PreconditionError("planar_condition_ii: n must be 2");
  const MaxMinSpec spec = maxmin_form(spec_in);
  require_candidate(sys, spec, cand);
  PlanarReport rep;
  rep.chain = cone_chain(sys, policy);
  const Basis basis = Basis::quadratic(cand.P);
  const int M = static_cast<int>(rep.chain.modes.size());
  rep.pass = true;
  for (int k = 0; k < M; ++k) {
    PlanarPoint pt;
    pt.k = k + 1;
    pt.mode_prev = rep.chain.modes[(k + M - 1) % M];
    pt.mode = rep.chain.modes[k];
    pt.v = rep.chain.v[k];
    const auto idx = index_set(sys, pt.v, policy);
    std::vector<int> want = {std::min(pt.mode_prev, pt.mode), std::max(pt.mode_prev, pt.mode)};
    if (idx != want) throw InvalidInput("partition inconsistent: switching line v" + std::to_string(k + 1) +
                                        " does not separate the expected regions");
    pt.active = active_indices(spec, basis, pt.v, policy).indices;
    if (pt.active.size() > 1) {
      std::vector<Vec> grads;
      for (int l : pt.active) grads.push_back(basis.grad(l, pt.v));
      const std::vector<Vec> fields = {sys.field(pt.mode_prev, pt.v), sys.field(pt.mode, pt.v)};
      pt.lambda = lambda_set(grads, fields, policy);
      if (!pt.lambda.empty()) {
        double worst = -kInf;
        for (const Vec& lam : pt.lambda.vertices) {
          const Vec f = lam[0] * fields[0] + lam[1] * fields[1];
          worst = std::max(worst, grads.front().dot(f));
        }
        pt.value = worst;
        pt.pass = worst < -policy.margin;
      }
    }
    rep.pass = rep.pass && pt.pass;
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

// ---------------------------------------------------------------------------

ExclusionReport sliding_exclusion(const SwitchedSystem& sys, const NumericPolicy& policy, int samples) {
  if (!sys.is_linear() || !sys.is_conic() || sys.size() != 2)
    throw PreconditionError("sliding_exclusion: needs two linear modes with cone regions");
  if (samples <= 0) throw InvalidInput("sliding_exclusion: samples must be positive");
  const SymMatrix& Q = *sys.mode(1).Q;
  const SymMatrix& Q2 = *sys.mode(2).Q;
  if ((Q.mat() + Q2.mat()).norm() > 1e-9 * (1.0 + Q.mat().norm()))
    throw PreconditionError("sliding_exclusion: regions must be Q and -Q");
  if (!(std::abs(Q.mat().determinant()) > policy.abs)) throw PreconditionError("sliding_exclusion: Q is singular");
  const int n = sys.dim();
  const Spectrum sp = eig_sym(Q);
  std::vector<int> pos, neg;
  for (int k = 0; k < n; ++k) (sp.values[k] > 0 ? pos : neg).push_back(k);
  if (pos.empty() || neg.empty()) throw PreconditionError("sliding_exclusion: Q is definite");
  // z = U |L|^{-1/2} zbar maps the signature cone zbar^T sign(L) zbar = 0 onto z^T Q z = 0.
  Mat T = sp.vectors;
  for (int k = 0; k < n; ++k) T.col(k) /= std::sqrt(std::abs(sp.values[k]));
  const Mat QA1 = Q.mat() * *sys.mode(1).A;
  const Mat QA2 = Q.mat() * *sys.mode(2).A;

  std::mt19937_64 rng(policy.seed);
  std::normal_distribution<double> normal;
  auto sphere = [&](int d) {
    Vec u(d);
    do {
      for (int k = 0; k < d; ++k) u[k] = normal(rng);
    } while (u.norm() == 0.0);
    return Vec(u / u.norm());
  };
  ExclusionReport rep;
  rep.samples = samples;
  rep.min_product = kInf;
  for (int s = 0; s < samples; ++s) {
    Vec zb = Vec::Zero(n);
    // S^0 is {-1, +1}; draw it uniformly like any other sphere.
    const Vec u = sphere(static_cast<int>(pos.size()));
    const Vec w = sphere(static_cast<int>(neg.size()));
    for (std::size_t k = 0; k < pos.size(); ++k) zb[pos[k]] = u[k] / std::sqrt(2.0);
    for (std::size_t k = 0; k < neg.size(); ++k) zb[neg[k]] = w[k] / std::sqrt(2.0);
    Vec z = T * zb;
    z /= z.norm();
    const double p = z.dot(QA1 * z) * z.dot(QA2 * z);
    if (p < rep.min_product) rep.min_product = p, rep.argmin = z;
  }
  rep.pass = rep.min_product > policy.margin;
  return rep;
}

TwoModeReport check_condition_ii_2mode(const SwitchedSystem& sys, const MaxMinSpec& spec_in, const Candidate& cand,
                                       const NumericPolicy& policy, int samples) {
  const MaxMinSpec spec = maxmin_form(spec_in);
  require_candidate(sys, spec, cand);
  TwoModeReport rep;
  rep.exclusion = sliding_exclusion(sys, policy, samples);
  rep.rank_margin = kInf;
  for (int a = 0; a < spec.K; ++a)
    for (int b = a + 1; b < spec.K; ++b) {
      const double s = min_abs_eigenvalue(cand.P[a] - cand.P[b]);
      if (s < rep.rank_margin) rep.rank_margin = s, rep.rank_pair = {a + 1, b + 1};
    }
  rep.rank_pass = rep.rank_margin > policy.abs;
  rep.pass = rep.exclusion.pass && rep.rank_pass;
  return rep;
}

// ---------------------------------------------------------------------------

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::GasCertified: return "GAS-certified";
    case Verdict::ConditionIOnly: return "condition-i-only";
    case Verdict::NotCertified: return "not-certified";
  }
  return "?";
}

namespace {

void condition_ii(const SwitchedSystem& sys, const MaxMinSpec& spec, Certificate& c) {
  if (sys.size() == 1) {
    c.condition_ii_note = "vacuous: a single mode never switches";
    c.verdict = Verdict::GasCertified;
    return;
  }
  try {
    if (sys.dim() == 2) {
      c.planar = planar_condition_ii(sys, spec, c.candidate, c.policy);
      c.condition_ii_note = "planar: exact at the switching lines";
      c.verdict = c.planar->pass ? Verdict::GasCertified : Verdict::ConditionIOnly;
    } else if (sys.size() == 2) {
      c.two_mode = check_condition_ii_2mode(sys, spec, c.candidate, c.policy, c.exclusion_samples);
      c.condition_ii_note = "two-mode: sliding exclusion sampled (N=" + std::to_string(c.exclusion_samples) +
                            "), rank exact";
      c.verdict = c.two_mode->pass ? Verdict::GasCertified : Verdict::ConditionIOnly;
    } else {
      c.condition_ii_note = "condition (ii) unchecked: no procedure for n >= 3 with more than two modes";
      c.verdict = Verdict::ConditionIOnly;
    }
  } catch (const InvalidInput& e) {
    c.condition_ii_note = std::string("condition (ii) failed: ") + e.what();
    c.verdict = Verdict::ConditionIOnly;
  } catch (const PreconditionError& e) {
    c.condition_ii_note = std::string("condition (ii) unchecked: ") + e.what();
    c.verdict = Verdict::ConditionIOnly;
  }
}

}  // namespace

Certificate certify(const SwitchedSystem& sys, const MaxMinSpec& spec, const std::optional<Candidate>& cand,
                    const CertifyOptions& opts, const NumericPolicy& policy) {
  require_certifiable(sys, "certify");
  Certificate c;
  c.policy = policy;
  c.exclusion_samples = opts.exclusion_samples;
  if (opts.search) {
    SearchOptions so = opts.search_options;
    so.policy = policy;
    c.search = search_condition_i(sys, spec, so);
    c.candidate = c.search->candidate;
    if (!c.search->found) {
      c.condition_i = c.search->report;
      c.verdict = Verdict::NotCertified;
      c.condition_ii_note = "not reached: no candidate satisfies condition (i)";
      return c;
    }
  } else {
    if (!cand) throw PreconditionError("certify: no candidate given and search disabled");
    c.candidate = *cand;
  }
  c.condition_i = check_condition_i(sys, spec, c.candidate, policy);
  if (!c.condition_i.pass) {
    c.verdict = Verdict::NotCertified;
    c.condition_ii_note = "not reached: condition (i) fails";
    return c;
  }
  condition_ii(sys, spec, c);
  return c;
}

bool reverify(const SwitchedSystem& sys, const MaxMinSpec& spec_in, const Certificate& cert, std::string* why) {
  auto fail = [&](const std::string& s) {
    if (why) *why = s;
    return false;
  };
  const MaxMinSpec spec = maxmin_form(spec_in);
  const Candidate& c = cert.candidate;
  // Rebuild each inequality directly with Eigen and an independent eigensolver.
  const auto perms = all_permutations(spec.K);
  std::size_t p = 0;
  bool all_neg = true;
  for (int i = 1; i <= sys.size(); ++i) {
    const Mode& m = sys.mode(i);
    for (const auto& rho : perms) {
      if (p >= cert.condition_i.pairs.size()) return fail("pair count mismatch");
      const PairMargin& pm = cert.condition_i.pairs[p++];
      if (pm.mode != i || pm.rho != rho) return fail("pair order mismatch");
      const bool empty = cone_intersection_empty(detail::pair_generators(sys, c.P, i, rho), cert.policy).empty;
      if (empty != pm.vacuous) return fail("vacuity mismatch at mode " + std::to_string(i));
      if (empty) continue;
      const Mat& Pf = c.P[phi(spec, rho) - 1].mat();
      Mat M = m.A->transpose() * Pf + Pf * *m.A;
      const Vec tau = c.multipliers.tau_of(i, rho);
      for (int k = 0; k + 1 < spec.K; ++k) M += tau[k] * (c.P[rho[k + 1] - 1].mat() - c.P[rho[k] - 1].mat());
      if (m.region == Mode::Region::Cone) M += c.multipliers.beta_of(i, rho) * m.Q->mat();
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
      const double lm = es.eigenvalues().maxCoeff();
      if (std::abs(lm - pm.margin) > 1e-8 * (1.0 + std::abs(lm))) {
        std::ostringstream os;
        os << "margin mismatch at mode " << i << ": stored " << pm.margin << ", recomputed " << lm;
        return fail(os.str());
      }
      all_neg = all_neg && lm < -cert.policy.margin;
    }
  }
  if (p != cert.condition_i.pairs.size()) return fail("pair count mismatch");
  if (all_neg != cert.condition_i.pass) return fail("condition (i) verdict mismatch");
  if (cert.verdict == Verdict::NotCertified) return true;
  if (!all_neg) return fail("verdict claims condition (i) but a margin is not negative");

  Certificate again;
  again.candidate = c;
  again.policy = cert.policy;
  again.exclusion_samples = cert.exclusion_samples;
  condition_ii(sys, spec, again);
  if (again.verdict != cert.verdict) return fail("condition (ii) verdict mismatch");
  if (cert.verdict == Verdict::GasCertified) {
    if (again.planar)
      for (const auto& pt : again.planar->points)
        if (pt.value && !(*pt.value < 0.0)) return fail("planar margin not negative");
    if (again.two_mode && !(again.two_mode->exclusion.min_product > 0.0 && again.two_mode->rank_margin > 0.0))
      return fail("two-mode margins not positive");
  }
  return true;
}

}  // namespace mmlyap
