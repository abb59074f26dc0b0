#include "certify_detail.hpp"
#include "mmlyap/certify.hpp"
#include "mmlyap/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

// Condition (i) is bilinear in (P, multipliers). The search runs Nelder-Mead
// over Cholesky factors of the P's; for fixed P's the multipliers of each
// (mode, ordering) pair are a small convex problem solved by line searches.
// A pair whose region D_i and ordering cone E_rho do not meet needs no
// inequality, and the objective credits it through a scale-free emptiness
// score. Whatever the optimizer proposes is re-checked from scratch.

namespace mmlyap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Problem {
  const SwitchedSystem* sys;
  MaxMinSpec spec;
  std::vector<Permutation> perms;
  std::vector<int> phis;
  int n = 0, K = 0, tri = 0;
  double floor = 1e-3;
};

std::vector<SymMatrix> unpack(const Problem& pb, const Vec& z) {
  std::vector<SymMatrix> P;
  double top = 0.0;
  std::vector<Mat> raw;
  for (int k = 0; k < pb.K; ++k) {
    Mat L = Mat::Zero(pb.n, pb.n);
    int idx = k * pb.tri;
    for (int i = 0; i < pb.n; ++i)
      for (int j = 0; j <= i; ++j) L(i, j) = z[idx++];
    Mat p = L * L.transpose();
    raw.push_back(p);
    top = std::max(top, p.trace());
  }
  // Scale invariance: normalize so the largest trace is n, then keep a floor for definiteness.
  const double s = top > 0.0 ? pb.n / top : 1.0;
  for (auto& p : raw) P.emplace_back(Mat(s * p + pb.floor * Mat::Identity(pb.n, pb.n)));
  return P;
}

Vec pack(const Problem& pb, const std::vector<SymMatrix>& P) {
  Vec z(pb.K * pb.tri);
  int idx = 0;
  for (const auto& p : P) {
    Eigen::LLT<Mat> llt(p.mat());
    const Mat L = llt.matrixL();
    for (int i = 0; i < pb.n; ++i)
      for (int j = 0; j <= i; ++j) z[idx++] = L(i, j);
  }
  return z;
}

// Worst pair score; negative means every pair is robustly empty or strictly feasible.
double objective(const Problem& pb, const Vec& z, int rounds) {
  const auto P = unpack(pb, z);
  double worst = -kInf;
  for (int i = 1; i <= pb.sys->size(); ++i) {
    const Mode& m = pb.sys->mode(i);
    const double an = m.A->norm() + 1.0;
    for (std::size_t r = 0; r < pb.perms.size(); ++r) {
      const auto gens = detail::pair_generators(*pb.sys, P, i, pb.perms[r]);
      const double e = detail::emptiness_score(gens, 8);
      if (e < worst) continue;  // cannot raise the maximum
      const Mat m0 = lyap_form(*m.A, P[pb.phis[r] - 1]).mat();
      std::vector<Mat> g;
      for (const auto& x : gens) g.push_back(x.mat());
      Vec t;
      const double f = detail::fit_pair(m0, g, t, rounds) / an;
      worst = std::max(worst, std::min(e, f));
    }
  }
  return worst;
}

struct NMResult {
  Vec x;
  double f = kInf;
  long evals = 0;
};

NMResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0, double step, long max_evals,
                     double target, const std::function<bool()>& out_of_time) {
  const int d = static_cast<int>(x0.size());
  std::vector<Vec> xs(d + 1, x0);
  std::vector<double> fs(d + 1);
  NMResult res;
  for (int k = 0; k < d; ++k) xs[k + 1][k] += step;
  for (int k = 0; k <= d; ++k) fs[k] = f(xs[k]), ++res.evals;
  std::vector<int> ord(d + 1);
  while (res.evals < max_evals) {
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = ord[0], worst = ord[d], second = ord[d - 1];
    if (fs[best] < target || out_of_time()) break;
    double spread = 0.0;
    for (int k = 0; k <= d; ++k) spread = std::max(spread, (xs[k] - xs[best]).norm());
    if (spread < 1e-9) break;
    Vec c = Vec::Zero(d);
    for (int k = 0; k <= d; ++k)
      if (k != worst) c += xs[k];
    c /= d;
    const Vec xr = c + (c - xs[worst]);
    const double fr = f(xr);
    ++res.evals;
    if (fr < fs[best]) {
      const Vec xe = c + 2.0 * (c - xs[worst]);
      const double fe = f(xe);
      ++res.evals;
      if (fe < fr) xs[worst] = xe, fs[worst] = fe;
      else xs[worst] = xr, fs[worst] = fr;
    } else if (fr < fs[second]) {
      xs[worst] = xr, fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const Vec xc = outside ? Vec(c + 0.5 * (xr - c)) : Vec(c + 0.5 * (xs[worst] - c));
      const double fc = f(xc);
      ++res.evals;
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc, fs[worst] = fc;
      } else {
        for (int k = 0; k <= d; ++k) {
          if (k == best) continue;
          xs[k] = xs[best] + 0.5 * (xs[k] - xs[best]);
          fs[k] = f(xs[k]);
          ++res.evals;
        }
      }
    }
  }
  const int b = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  res.x = xs[b];
  res.f = fs[b];
  return res;
}

bool hurwitz(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

// Start s: Lyapunov solutions of the modes, assigned to basis functions in a
// seed-dependent order and perturbed; odd starts mix in random factors.
Vec seed_point(const Problem& pb, int s, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919u + static_cast<std::uint64_t>(s));
  std::normal_distribution<double> normal;
  std::vector<int> assign(pb.K);
  std::vector<int> modes(pb.sys->size());
  std::iota(modes.begin(), modes.end(), 1);
  if (s > 0) std::shuffle(modes.begin(), modes.end(), rng);
  std::vector<SymMatrix> P;
  const double noise = s == 0 ? 0.0 : 0.15 * (1 + s % 3);
  for (int k = 0; k < pb.K; ++k) {
    const Mat& A = *pb.sys->mode(modes[k % modes.size()]).A;
    Mat base = Mat::Identity(pb.n, pb.n);
    if (hurwitz(A) && s % 4 != 3) {
      base = lyapunov(A, SymMatrix::identity(pb.n)).mat();
      base /= base.trace() / pb.n;
    }
    Mat R(pb.n, pb.n);
    for (int i = 0; i < pb.n; ++i)
      for (int j = 0; j < pb.n; ++j) R(i, j) = normal(rng);
    Mat p = base + noise * (R * R.transpose()) / pb.n;
    P.emplace_back(Mat(0.5 * (p + p.transpose())));
  }
  return pack(pb, P);
}

}  // namespace

SearchResult search_condition_i(const SwitchedSystem& sys, const MaxMinSpec& spec_in, const SearchOptions& opts) {
  if (!sys.is_linear() || (sys.size() > 1 && !sys.is_conic()))
    throw PreconditionError("search_condition_i: needs a linear cone-partitioned system");
  spec_in.validate();
  Problem pb;
  pb.sys = &sys;
  pb.spec = spec_in.polarity == Polarity::MaxMin ? spec_in : dualize(spec_in);
  if (pb.spec.K > 6) throw PreconditionError("search_condition_i: K > 6 permutations refused (K! grows too fast)");
  pb.perms = all_permutations(pb.spec.K);
  for (const auto& r : pb.perms) pb.phis.push_back(phi(pb.spec, r));
  pb.n = sys.dim();
  pb.K = pb.spec.K;
  pb.tri = pb.n * (pb.n + 1) / 2;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  SearchResult res;
  res.best_objective = kInf;

  // Starts run in parallel batches; results are merged in start order so the outcome is deterministic.
  const int workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  struct Slot {
    NMResult nm;
    bool done = false;
  };
  std::vector<Slot> slots(opts.starts);
  const long per_start = std::max<long>(1000, opts.max_evaluations / std::max(1, opts.starts));
  const double target = -1e-3;
  auto run = [&](int s) {
    const Vec z0 = seed_point(pb, s, opts.policy.seed);
    auto f = [&](const Vec& z) { return objective(pb, z, 4); };
    auto late = [&] { return elapsed() > opts.time_budget; };
    NMResult nm = nelder_mead(f, z0, 0.3, per_start / 2, target, late);
    // Restart from the best vertex with a smaller simplex.
    if (nm.f >= target && !late()) {
      NMResult again = nelder_mead(f, nm.x, 0.05, per_start / 2, target, late);
      again.evals += nm.evals;
      if (again.f <= nm.f) nm = again;
      else nm.evals = again.evals;
    }
    slots[s].nm = nm;
    slots[s].done = true;
  };

  for (int first = 0; first < opts.starts && elapsed() < opts.time_budget; first += workers) {
    const int last = std::min(opts.starts, first + workers);
    std::vector<std::thread> pool;
    for (int s = first; s < last; ++s) pool.emplace_back(run, s);
    for (auto& th : pool) th.join();
    for (int s = first; s < last; ++s) {
      const Slot& sl = slots[s];
      if (!sl.done) continue;
      ++res.starts_used;
      res.evaluations += sl.nm.evals;
      if (sl.nm.f < res.best_objective) {
        res.best_objective = sl.nm.f;
        res.candidate = fit_multipliers(sys, pb.spec, unpack(pb, sl.nm.x), opts.policy);
      }
      if (sl.nm.f < 0.0) {
        Candidate c = fit_multipliers(sys, pb.spec, unpack(pb, sl.nm.x), opts.policy);
        ConditionIReport rep = check_condition_i(sys, pb.spec, c, opts.policy);
        if (rep.pass && rep.worst <= -opts.margin) {
          res.found = true;
          res.candidate = std::move(c);
          res.report = std::move(rep);
          res.note = "accepted from start " + std::to_string(s);
          res.seconds = elapsed();
          return res;
        }
      }
    }
  }
  res.seconds = elapsed();
  if (!res.candidate.P.empty()) res.report = check_condition_i(sys, pb.spec, res.candidate, opts.policy);
  res.note = res.seconds > opts.time_budget ? "time budget exhausted" : "all starts exhausted";
  return res;
}

}  // namespace mmlyap
