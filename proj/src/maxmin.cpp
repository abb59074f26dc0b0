#include "mmlyap/maxmin.hpp"

#include "mmlyap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace mmlyap {

void MaxMinSpec::validate() const {
  if (K < 1) throw InvalidInput("structure needs at least one base function");
  if (families.empty()) throw InvalidInput("structure needs at least one family");
  for (std::size_t j = 0; j < families.size(); ++j) {
    if (families[j].empty()) throw InvalidInput("family S" + std::to_string(j + 1) + " is empty");
    for (int k : families[j])
      if (k < 1 || k > K)
        throw InvalidInput("family S" + std::to_string(j + 1) + " references index " + std::to_string(k) +
                           " outside 1.." + std::to_string(K));
  }
}

std::string MaxMinSpec::str() const {
  const bool mm = polarity == Polarity::MaxMin;
  std::string s = mm ? "max{" : "min{";
  for (std::size_t j = 0; j < families.size(); ++j) {
    if (j) s += ", ";
    s += mm ? "min{" : "max{";
    for (std::size_t i = 0; i < families[j].size(); ++i) s += (i ? "," : "") + std::to_string(families[j][i]);
    s += "}";
  }
  return s + "}";
}

std::vector<Permutation> all_permutations(int K) {
  Permutation p(K);
  for (int i = 0; i < K; ++i) p[i] = i + 1;
  std::vector<Permutation> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

int phi(const MaxMinSpec& spec, const Permutation& rho) {
  if (spec.polarity != Polarity::MaxMin) throw PreconditionError("phi expects max-min polarity; dualize first");
  if (static_cast<int>(rho.size()) != spec.K) throw InvalidInput("permutation length differs from K");
  std::vector<int> pos(spec.K + 1, -1);
  for (int r = 0; r < spec.K; ++r) {
    if (rho[r] < 1 || rho[r] > spec.K || pos[rho[r]] >= 0) throw InvalidInput("not a permutation of 1..K");
    pos[rho[r]] = r;
  }
  // First loop: the rho-earliest member of each family. Second: the rho-latest of those.
  int best = -1;
  for (const auto& fam : spec.families) {
    int earliest = fam.front();
    for (int k : fam)
      if (pos[k] < pos[earliest]) earliest = k;
    if (best < 0 || pos[earliest] > pos[best]) best = earliest;
  }
  return best;
}

MaxMinSpec dualize(const MaxMinSpec& spec) {
  spec.validate();
  std::set<std::vector<int>> sets;
  std::vector<std::size_t> choice(spec.families.size(), 0);
  for (;;) {
    std::vector<int> s;
    for (std::size_t j = 0; j < choice.size(); ++j) s.push_back(spec.families[j][choice[j]]);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    sets.insert(s);
    std::size_t j = 0;
    while (j < choice.size() && ++choice[j] == spec.families[j].size()) choice[j++] = 0;
    if (j == choice.size()) break;
  }
  MaxMinSpec out;
  out.K = spec.K;
  out.polarity = spec.polarity == Polarity::MaxMin ? Polarity::MinMax : Polarity::MaxMin;
  for (const auto& s : sets) {
    bool dominated = false;
    for (const auto& t : sets)
      if (t != s && std::includes(s.begin(), s.end(), t.begin(), t.end())) {
        dominated = true;
        break;
      }
    if (!dominated) out.families.push_back(s);
  }
  return out;
}

Basis Basis::quadratic(std::vector<SymMatrix> p) {
  if (p.empty()) throw InvalidInput("basis needs at least one matrix");
  Basis b;
  b.quadratic_ = true;
  b.n_ = p.front().dim();
  for (const auto& m : p)
    if (m.dim() != b.n_) throw InvalidInput("basis matrices have different dimensions");
  b.p_ = std::move(p);
  return b;
}

Basis Basis::expressions(std::vector<Expr> v, int n) {
  if (v.empty()) throw InvalidInput("basis needs at least one function");
  Basis b;
  b.quadratic_ = false;
  b.n_ = n;
  for (const auto& e : v) {
    if (e.arity() > n) throw InvalidInput("basis expression references a variable beyond the dimension");
    b.grads_.push_back(gradient(e, n));
  }
  b.v_ = std::move(v);
  return b;
}

double Basis::value(int k, const Vec& x) const {
  if (k < 1 || k > size()) throw InvalidInput("basis index out of range");
  if (x.size() != n_) throw InvalidInput("basis evaluation: dimension mismatch");
  return quadratic_ ? p_[k - 1].quad(x) : v_[k - 1].eval(x);
}

Vec Basis::values(const Vec& x) const {
  Vec v(size());
  for (int k = 1; k <= size(); ++k) v[k - 1] = value(k, x);
  return v;
}

Vec Basis::grad(int k, const Vec& x) const {
  if (k < 1 || k > size()) throw InvalidInput("basis index out of range");
  if (x.size() != n_) throw InvalidInput("basis gradient: dimension mismatch");
  if (quadratic_) return 2.0 * (p_[k - 1].mat() * x);
  Vec g(n_);
  for (int i = 0; i < n_; ++i) g[i] = grads_[k - 1][i].eval(x);
  return g;
}

double eval_values(const MaxMinSpec& spec, const Vec& values) {
  const bool mm = spec.polarity == Polarity::MaxMin;
  double outer = mm ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (const auto& fam : spec.families) {
    double inner = values[fam.front() - 1];
    for (int k : fam) inner = mm ? std::min(inner, values[k - 1]) : std::max(inner, values[k - 1]);
    outer = mm ? std::max(outer, inner) : std::min(outer, inner);
  }
  return outer;
}

double eval(const MaxMinSpec& spec, const Basis& basis, const Vec& x) {
  if (basis.size() != spec.K) throw InvalidInput("basis size differs from K");
  return eval_values(spec, basis.values(x));
}

Permutation ordering(const Vec& values) {
  Permutation p(values.size());
  for (int i = 0; i < values.size(); ++i) p[i] = i + 1;
  std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return values[a - 1] < values[b - 1]; });
  return p;
}

bool strictly_ordered(const Vec& values) {
  const Permutation p = ordering(values);
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!(values[p[i - 1] - 1] < values[p[i] - 1])) return false;
  return true;
}

int selected_index(const MaxMinSpec& spec, const Vec& values) {
  if (spec.polarity == Polarity::MaxMin) return phi(spec, ordering(values));
  // Min-max: the rho-latest member of each family, then the rho-earliest of those.
  const Permutation rho = ordering(values);
  std::vector<int> pos(spec.K + 1);
  for (int r = 0; r < spec.K; ++r) pos[rho[r]] = r;
  int best = -1;
  for (const auto& fam : spec.families) {
    int latest = fam.front();
    for (int k : fam)
      if (pos[k] > pos[latest]) latest = k;
    if (best < 0 || pos[latest] < pos[best]) best = latest;
  }
  return best;
}

const char* method_name(ActiveSet::Method m) {
  switch (m) {
    case ActiveSet::Method::ExactSmooth:
      return "exact-smooth";
    case ActiveSet::Method::AngularSweep:
      return "angular-sweep";
    case ActiveSet::Method::PerturbationSampled:
      return "perturbation-sampled";
  }
  return "?";
}

std::vector<int> equal_value_set(const MaxMinSpec& spec, const Basis& basis, const Vec& x,
                                 const NumericPolicy& policy) {
  const Vec v = basis.values(x);
  const double V = eval_values(spec, v);
  std::vector<int> out;
  for (int k = 1; k <= spec.K; ++k)
    if (policy.tie(v[k - 1], V, V)) out.push_back(k);
  return out;
}

namespace {

constexpr double kPi = std::numbers::pi;

// Roots in [0, pi) of phi -> u(phi)^T D u(phi) with u = (cos, sin).
std::vector<double> circle_roots(const Mat& d) {
  const double m = 0.5 * (d(0, 0) + d(1, 1));
  const double a = 0.5 * (d(0, 0) - d(1, 1));
  const double b = d(0, 1);
  const double r = std::hypot(a, b);
  std::vector<double> out;
  if (r <= 1e-15 * (std::abs(m) + 1e-300) || r == 0.0 || std::abs(m) > r) return out;
  // m + r cos(2 phi - psi) = 0
  const double psi = std::atan2(b, a);
  const double w = std::acos(std::clamp(-m / r, -1.0, 1.0));
  for (double t : {psi + w, psi - w}) {
    double p = std::fmod(0.5 * t, kPi);
    if (p < 0) p += kPi;
    out.push_back(p);
  }
  return out;
}

double circle_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}

Vec unit(double phi) {
  Vec u(2);
  u << std::cos(phi), std::sin(phi);
  return u;
}

void add_selection(const MaxMinSpec& spec, const Basis& basis, const Vec& y, std::set<int>& out, bool& tie_seen) {
  const Vec v = basis.values(y);
  if (!strictly_ordered(v)) tie_seen = true;
  out.insert(selected_index(spec, v));
}

}  // namespace

ActiveSet active_indices(const MaxMinSpec& spec, const Basis& basis, const Vec& x, const NumericPolicy& policy) {
  if (basis.size() != spec.K) throw InvalidInput("basis size differs from K");
  if (x.size() != basis.dim()) throw InvalidInput("active_indices: dimension mismatch");
  require_finite(x, "active_indices");

  ActiveSet result;
  const std::vector<int> ties = equal_value_set(spec, basis, x, policy);
  const Vec vx = basis.values(x);
  if (ties.size() == 1) {
    result.indices = ties;
    result.method = ActiveSet::Method::ExactSmooth;
    return result;
  }

  std::set<int> found;
  bool tie_seen = false;
  const double xnorm = x.norm();

  if (basis.is_quadratic() && basis.dim() == 2) {
    result.method = ActiveSet::Method::AngularSweep;
    std::vector<double> roots;
    double eps = 0.1;
    const double phi0 = xnorm > 0 ? std::atan2(x[1], x[0]) : 0.0;
    for (int a = 1; a <= spec.K; ++a)
      for (int b = a + 1; b <= spec.K; ++b) {
        const Mat d = (basis.P(a) - basis.P(b)).mat();
        std::vector<double> r = circle_roots(d);
        if (xnorm > 0) {
          const bool tied = policy.tie(vx[a - 1], vx[b - 1], eval_values(spec, vx));
          // Drop the root sitting at x itself; every other root bounds the sweep.
          if (tied && !r.empty()) {
            auto at_x = std::min_element(r.begin(), r.end(), [&](double p, double q) {
              return circle_dist(p, phi0) < circle_dist(q, phi0);
            });
            r.erase(at_x);
          }
          for (double p : r) eps = std::min(eps, 0.5 * circle_dist(p, phi0));
        }
        roots.insert(roots.end(), r.begin(), r.end());
      }

    if (xnorm == 0.0) {
      // Every arc between consecutive roots meets any neighbourhood of the origin.
      std::sort(roots.begin(), roots.end());
      if (roots.empty()) {
        add_selection(spec, basis, unit(0.0), found, tie_seen);
      } else {
        for (std::size_t i = 0; i < roots.size(); ++i) {
          const double a = roots[i];
          const double b = i + 1 < roots.size() ? roots[i + 1] : roots.front() + kPi;
          if (b - a > 1e-14) add_selection(spec, basis, unit(0.5 * (a + b)), found, tie_seen);
        }
      }
    } else if (eps > 1e-13) {
      add_selection(spec, basis, unit(phi0 - eps), found, tie_seen);
      add_selection(spec, basis, unit(phi0 + eps), found, tie_seen);
    } else {
      result.method = ActiveSet::Method::PerturbationSampled;
    }
  } else {
    result.method = ActiveSet::Method::PerturbationSampled;
  }

  if (result.method == ActiveSet::Method::PerturbationSampled) {
    std::mt19937_64 rng(policy.seed);
    std::normal_distribution<double> normal;
    const int n = basis.dim();
    const double r0 = xnorm > 0 ? std::max(policy.rel, 1e-9) * std::max(1.0, xnorm) : 1.0;
    for (double scale : {1.0, 2.0, 4.0}) {
      for (int s = 0; s < policy.directions; ++s) {
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = normal(rng);
        const double dn = d.norm();
        if (dn == 0.0) continue;
        const Vec y = x + (r0 * scale / dn) * d;
        const Vec v = basis.values(y);
        if (!strictly_ordered(v)) continue;
        found.insert(selected_index(spec, v));
      }
    }
  }

  for (int k : found)
    if (std::find(ties.begin(), ties.end(), k) != ties.end()) result.indices.push_back(k);
  if (result.indices.empty()) {
    // Sampling missed every cell; the index attaining V at x is always essentially active
    // for a strictly ordered neighbourhood, so fall back to it.
    result.indices.push_back(selected_index(spec, vx));
    result.warnings.push_back("perturbation sampling found no strictly ordered neighbour");
  }
  if (tie_seen) result.warnings.push_back("degenerate basis: identical base values on an open arc");
  return result;
}

GradientHull clarke_gradient(const MaxMinSpec& spec, const Basis& basis, const Vec& x, const NumericPolicy& policy) {
  GradientHull h;
  h.indices = active_indices(spec, basis, x, policy).indices;
  for (int k : h.indices) h.vertices.push_back(basis.grad(k, x));
  return h;
}

}  // namespace mmlyap
