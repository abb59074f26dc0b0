#include "mmlyap/inclusion.hpp"

#include "mmlyap/errors.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace mmlyap {

SwitchedSystem::SwitchedSystem(int n, std::vector<Mode> modes) : n_(n), modes_(std::move(modes)) {
  if (n_ < 1) throw InvalidInput("system dimension must be at least 1");
  if (modes_.empty()) throw InvalidInput("system needs at least one mode");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const Mode& m = modes_[i];
    const std::string tag = "mode " + std::to_string(i + 1);
    if (static_cast<int>(m.field.size()) != n_) throw InvalidInput(tag + ": vector field has wrong length");
    for (const auto& e : m.field)
      if (e.arity() > n_) throw InvalidInput(tag + ": vector field references a variable beyond the dimension");
    if (m.A && (m.A->rows() != n_ || m.A->cols() != n_)) throw InvalidInput(tag + ": A has wrong shape");
    if (m.region == Mode::Region::Cone) {
      if (!m.Q || m.Q->dim() != n_) throw InvalidInput(tag + ": Q has wrong shape");
      if (negdef_margin(*m.Q) <= 0.0) throw InvalidInput(tag + ": Q is negative semidefinite, so the region is empty");
    }
    if (m.region == Mode::Region::Function) {
      if (m.H.arity() > n_) throw InvalidInput(tag + ": region function references a variable beyond the dimension");
      if (static_cast<int>(m.grad_H.size()) != n_) throw InvalidInput(tag + ": region gradient missing");
    }
  }
}

Mode SwitchedSystem::linear_mode(const Mat& a, std::optional<SymMatrix> q) {
  require_finite(a, "A");
  if (a.rows() != a.cols()) throw InvalidInput("A must be square");
  const int n = static_cast<int>(a.rows());
  Mode m;
  m.A = a;
  for (int i = 0; i < n; ++i) {
    Expr row;
    for (int j = 0; j < n; ++j)
      if (a(i, j) != 0.0) row = row + Expr::constant(a(i, j)) * Expr::var(j);
    m.field.push_back(row);
  }
  if (q) {
    m.region = Mode::Region::Cone;
    m.Q = q;
  }
  return m;
}

Mode SwitchedSystem::expr_mode(std::vector<Expr> f, int /*n*/) {
  Mode m;
  m.field = std::move(f);
  return m;
}

bool SwitchedSystem::is_linear() const {
  for (const auto& m : modes_)
    if (!m.A) return false;
  return true;
}

bool SwitchedSystem::is_conic() const {
  for (const auto& m : modes_)
    if (m.region != Mode::Region::Cone) return false;
  return true;
}

Vec SwitchedSystem::field(int i, const Vec& x) const {
  if (x.size() != n_) throw InvalidInput("field: dimension mismatch");
  const Mode& m = mode(i);
  if (m.A) return *m.A * x;
  Vec f(n_);
  for (int k = 0; k < n_; ++k) f[k] = m.field[k].eval(x);
  return f;
}

double SwitchedSystem::region_value(int i, const Vec& x) const {
  const Mode& m = mode(i);
  switch (m.region) {
    case Mode::Region::All:
      return std::numeric_limits<double>::infinity();
    case Mode::Region::Cone:
      return m.Q->quad(x);
    case Mode::Region::Function:
      return m.H.eval(x);
  }
  return 0.0;
}

Vec SwitchedSystem::region_grad(int i, const Vec& x) const {
  const Mode& m = mode(i);
  switch (m.region) {
    case Mode::Region::All:
      return Vec::Zero(n_);
    case Mode::Region::Cone:
      return 2.0 * (m.Q->mat() * x);
    case Mode::Region::Function: {
      Vec g(n_);
      for (int k = 0; k < n_; ++k) g[k] = m.grad_H[k].eval(x);
      return g;
    }
  }
  return Vec::Zero(n_);
}

double SwitchedSystem::closure_band(int i, const Vec& x, double abs) const {
  const double r2 = x.squaredNorm();
  return mode(i).region == Mode::Region::Cone ? abs * r2 : abs * std::max(1.0, r2);
}

std::vector<int> index_set(const SwitchedSystem& sys, const Vec& x, const NumericPolicy& policy) {
  require_finite(x, "index_set");
  if (x.size() != sys.dim()) throw InvalidInput("index_set: dimension mismatch");
  std::vector<int> out;
  for (int i = 1; i <= sys.size(); ++i)
    if (sys.region_value(i, x) >= -sys.closure_band(i, x, policy.abs)) out.push_back(i);
  if (out.empty()) {
    std::ostringstream os;
    os << "no region contains x = (" << x.transpose() << ")";
    throw CoverageError(os.str());
  }
  return out;
}

FilippovSet filippov_set(const SwitchedSystem& sys, const Vec& x, const NumericPolicy& policy) {
  FilippovSet s;
  s.indices = index_set(sys, x, policy);
  for (int i : s.indices) s.vertices.push_back(sys.field(i, x));
  return s;
}

PartitionReport check_partition(const SwitchedSystem& sys, int samples, const NumericPolicy& policy) {
  PartitionReport r;
  std::mt19937_64 rng(policy.seed);
  std::normal_distribution<double> normal;
  const int n = sys.dim();
  const bool conic = sys.is_conic();
  const double radii[] = {1.0, 0.1, 10.0};
  for (int s = 0; s < samples; ++s) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x[k] = normal(rng);
    if (x.norm() == 0.0) continue;
    x *= (conic ? 1.0 : radii[s % 3]) / x.norm();
    ++r.samples;
    int strict = 0;
    bool any_closure = false;
    for (int i = 1; i <= sys.size(); ++i) {
      const double h = sys.region_value(i, x);
      const double band = sys.closure_band(i, x, policy.abs);
      if (h > band) ++strict;
      if (h >= -band) any_closure = true;
    }
    std::ostringstream os;
    os.precision(6);
    if (strict > 1) {
      ++r.overlaps;
      if (r.messages.size() < 5) {
        os << "regions overlap at (" << x.transpose() << ")";
        r.messages.push_back(os.str());
      }
    } else if (!any_closure) {
      ++r.gaps;
      if (r.messages.size() < 5) {
        os << "no region covers (" << x.transpose() << ")";
        r.messages.push_back(os.str());
      }
    }
  }
  return r;
}

}  // namespace mmlyap
