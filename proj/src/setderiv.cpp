#include "mmlyap/setderiv.hpp"

#include "lp.hpp"
#include "mmlyap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmlyap {

const char* kind_name(SimplexSet::Kind k) {
  switch (k) {
    case SimplexSet::Kind::Empty:
      return "Empty";
    case SimplexSet::Kind::Point:
      return "Point";
    case SimplexSet::Kind::Segment:
      return "Segment";
    case SimplexSet::Kind::Polytope:
      return "Polytope";
    case SimplexSet::Kind::FullSimplex:
      return "FullSimplex";
  }
  return "?";
}

namespace {

// Zero threshold on constraint rows normalized by |delta grad| * max |f|.
double row_tol(const NumericPolicy& policy) { return 10.0 * (policy.abs + policy.rel); }

void add_vertex(std::vector<Vec>& vs, Vec v) {
  v = v.cwiseMax(0.0);
  v /= v.sum();
  for (const auto& w : vs)
    if ((w - v).lpNorm<Eigen::Infinity>() <= 1e-9) return;
  vs.push_back(std::move(v));
}

SimplexSet classify(SimplexSet s) {
  switch (s.vertices.size()) {
    case 0:
      s.kind = SimplexSet::Kind::Empty;
      break;
    case 1:
      s.kind = SimplexSet::Kind::Point;
      break;
    case 2:
      s.kind = SimplexSet::Kind::Segment;
      break;
    default:
      s.kind = SimplexSet::Kind::Polytope;
  }
  return s;
}

Vec unit_vec(int m, int j) {
  Vec e = Vec::Zero(m);
  e[j] = 1.0;
  return e;
}

}  // namespace

SimplexSet lambda_set(const std::vector<Vec>& grads, const std::vector<Vec>& fields, const NumericPolicy& policy) {
  if (grads.empty() || fields.empty()) throw PreconditionError("lambda_set needs at least one gradient and one field");
  const int p = static_cast<int>(grads.size());
  const int m = static_cast<int>(fields.size());
  double fmax = 0.0;
  for (const auto& f : fields) fmax = std::max(fmax, f.norm());
  const double tol = row_tol(policy);

  std::vector<Vec> rows;
  for (int k = 0; k + 1 < p; ++k) {
    const Vec dg = grads[k + 1] - grads[k];
    const double scale = dg.norm() * fmax;
    if (scale == 0.0) continue;
    Vec row(m);
    for (int j = 0; j < m; ++j) row[j] = dg.dot(fields[j]) / scale;
    if (row.lpNorm<Eigen::Infinity>() <= tol) continue;
    for (int j = 0; j < m; ++j)
      if (std::abs(row[j]) <= tol) row[j] = 0.0;
    rows.push_back(row);
  }

  SimplexSet s;
  s.m = m;
  s.constraints.resize(static_cast<int>(rows.size()), m);
  for (std::size_t k = 0; k < rows.size(); ++k) s.constraints.row(static_cast<int>(k)) = rows[k].transpose();

  if (rows.empty()) {
    s.kind = SimplexSet::Kind::FullSimplex;
    for (int j = 0; j < m; ++j) s.vertices.push_back(unit_vec(m, j));
    return s;
  }

  if (m == 2 && rows.size() == 1) {
    // Closed form: lambda a + (1 - lambda) b = 0.
    const double a = rows[0][0], b = rows[0][1];
    if (a == 0.0) {
      add_vertex(s.vertices, unit_vec(2, 0));
    } else if (b == 0.0) {
      add_vertex(s.vertices, unit_vec(2, 1));
    } else if (a * b < 0.0) {
      const double l = b / (b - a);
      Vec v(2);
      v << l, 1.0 - l;
      add_vertex(s.vertices, v);
    }
    return classify(std::move(s));
  }

  if (m > 4) {
    Mat A(s.constraints.rows() + 1, m);
    A << s.constraints, Vec::Ones(m).transpose();
    Vec b = Vec::Zero(A.rows());
    b[A.rows() - 1] = 1.0;
    const auto r = detail::lp_solve(A, b, Vec::Zero(m));
    s.implicit = true;
    s.kind = r.status == detail::LpResult::Status::Optimal ? SimplexSet::Kind::Polytope : SimplexSet::Kind::Empty;
    return s;
  }

  // Vertex enumeration: every vertex is the unique solution on some support set.
  const int r = static_cast<int>(rows.size());
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<int> supp;
    for (int j = 0; j < m; ++j)
      if (mask & (1 << j)) supp.push_back(j);
    const int q = static_cast<int>(supp.size());
    if (q > r + 1) continue;
    Mat M(r + 1, q);
    for (int c = 0; c < q; ++c) {
      M.block(0, c, r, 1) = s.constraints.col(supp[c]);
      M(r, c) = 1.0;
    }
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec sv = svd.singularValues();
    if (sv[q - 1] <= 1e-10 * sv[0]) continue;
    Vec rhs = Vec::Zero(r + 1);
    rhs[r] = 1.0;
    const Vec sol = svd.solve(rhs);
    if ((M * sol - rhs).lpNorm<Eigen::Infinity>() > tol) continue;
    if (sol.minCoeff() < -tol) continue;
    Vec lam = Vec::Zero(m);
    for (int c = 0; c < q; ++c) lam[supp[c]] = sol[c];
    add_vertex(s.vertices, lam);
  }
  return classify(std::move(s));
}

LieSet lie_set(const std::vector<Vec>& grads, const std::vector<Vec>& fields, const NumericPolicy& policy) {
  const SimplexSet lam = lambda_set(grads, fields, policy);
  LieSet out;
  if (lam.empty()) return out;
  const int m = lam.m;
  Mat F(grads.front().size(), m);
  for (int j = 0; j < m; ++j) F.col(j) = fields[j];

  double gmax = 0.0, fmax = 0.0;
  for (const auto& g : grads) gmax = std::max(gmax, g.norm());
  for (const auto& f : fields) fmax = std::max(fmax, f.norm());
  const double spread_tol = 1e3 * (policy.abs + policy.rel) * gmax * fmax + policy.abs;

  std::vector<Vec> witnesses = lam.vertices;
  if (lam.implicit) {
    // Extremes of a linear objective over the polytope, via the LP.
    Mat A(lam.constraints.rows() + 1, m);
    A << lam.constraints, Vec::Ones(m).transpose();
    Vec b = Vec::Zero(A.rows());
    b[A.rows() - 1] = 1.0;
    const Vec c = F.transpose() * grads.front();
    for (double sign : {1.0, -1.0}) {
      const auto r = detail::lp_solve(A, b, sign * c);
      if (r.status == detail::LpResult::Status::Optimal) witnesses.push_back(r.x);
    }
    if (witnesses.empty()) return out;
  }

  out.empty = false;
  out.lo = std::numeric_limits<double>::infinity();
  out.hi = -std::numeric_limits<double>::infinity();
  for (const auto& w : witnesses) {
    const Vec f = F * w;
    const double v = grads.front().dot(f);
    for (const auto& g : grads) out.spread = std::max(out.spread, std::abs(g.dot(f) - v));
    if (v < out.lo) {
      out.lo = v;
      out.lo_witness = w;
    }
    if (v > out.hi) {
      out.hi = v;
      out.hi_witness = w;
    }
  }
  if (out.spread > spread_tol)
    throw InternalError("Lie derivative disagrees across active indices (spread " + format_double(out.spread) +
                        "); the active set is likely over-approximated");
  return out;
}

LieSet lie_derivative(const MaxMinSpec& spec, const Basis& basis, const SwitchedSystem& sys, const Vec& x,
                      const NumericPolicy& policy) {
  if (basis.dim() != sys.dim()) throw InvalidInput("basis and system dimensions differ");
  const GradientHull h = clarke_gradient(spec, basis, x, policy);
  const FilippovSet f = filippov_set(sys, x, policy);
  return lie_set(h.vertices, f.vertices, policy);
}

ClarkeSet clarke_set(const std::vector<Vec>& grads, const std::vector<Vec>& fields) {
  ClarkeSet c;
  c.lo = std::numeric_limits<double>::infinity();
  c.hi = -std::numeric_limits<double>::infinity();
  for (const auto& g : grads)
    for (const auto& f : fields) {
      const double v = g.dot(f);
      c.lo = std::min(c.lo, v);
      c.hi = std::max(c.hi, v);
    }
  return c;
}

ClarkeSet clarke_derivative(const MaxMinSpec& spec, const Basis& basis, const SwitchedSystem& sys, const Vec& x,
                            const NumericPolicy& policy) {
  if (basis.dim() != sys.dim()) throw InvalidInput("basis and system dimensions differ");
  const GradientHull h = clarke_gradient(spec, basis, x, policy);
  const FilippovSet f = filippov_set(sys, x, policy);
  return clarke_set(h.vertices, f.vertices);
}

DecreaseReport decrease_check(const MaxMinSpec& spec, const Basis& basis, const SwitchedSystem& sys,
                              const std::vector<Vec>& points, double rate, bool use_clarke,
                              const NumericPolicy& policy) {
  if (points.empty()) throw InvalidInput("decrease check needs at least one sample point");
  DecreaseReport rep;
  rep.clarke = use_clarke;
  rep.rate = rate;
  rep.note = sys.is_linear() && sys.is_conic() ? "sampled" : "sampled, not certified (nonlinear system)";
  for (const auto& x : points) {
    if (x.norm() == 0.0) throw InvalidInput("decrease check sample points must exclude the origin");
    DecreasePoint dp;
    dp.x = x;
    dp.bound = -rate * x.squaredNorm();
    if (use_clarke) {
      dp.value = clarke_derivative(spec, basis, sys, x, policy).hi;
    } else {
      const LieSet l = lie_derivative(spec, basis, sys, x, policy);
      if (!l.empty) dp.value = l.hi;
    }
    dp.violated = dp.value && !(*dp.value < dp.bound);
    if (dp.violated) ++rep.violations;
    rep.points.push_back(std::move(dp));
  }
  return rep;
}

}  // namespace mmlyap
