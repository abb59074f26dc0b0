#include "lp.hpp"

#include <limits>
#include <vector>

namespace mmlyap::detail {

namespace {

// Tableau with basis bookkeeping. Column `cols` holds the right-hand side.
struct Tableau {
  Mat t;
  std::vector<int> basis;
  int rows = 0, cols = 0;

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < t.rows(); ++i)
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    basis[r] = c;
  }

  // Minimizes the objective stored in the last row over the allowed columns.
  bool optimize(int allowed_cols, double tol) {
    const int obj = rows;
    for (int iter = 0; iter < 5000; ++iter) {
      int enter = -1;
      for (int c = 0; c < allowed_cols; ++c)
        if (t(obj, c) < -tol) {
          enter = c;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows; ++r)
        if (t(r, enter) > tol) {
          const double ratio = t(r, cols) / t(r, enter);
          if (ratio < best - tol || (ratio <= best + tol && leave >= 0 && basis[r] < basis[leave])) {
            best = ratio;
            leave = r;
          }
        }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  }
};

}  // namespace

LpResult lp_solve(const Mat& A, const Vec& b, const Vec& c, double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  LpResult res;

  // Phase 1: artificial variable per row, rows flipped so the rhs is nonnegative.
  Tableau tb;
  tb.rows = m;
  tb.cols = n + m;
  tb.t = Mat::Zero(m + 1, n + m + 1);
  tb.basis.resize(m);
  for (int r = 0; r < m; ++r) {
    const double s = b[r] < 0 ? -1.0 : 1.0;
    tb.t.row(r).head(n) = s * A.row(r);
    tb.t(r, n + r) = 1.0;
    tb.t(r, n + m) = s * b[r];
    tb.basis[r] = n + r;
  }
  for (int r = 0; r < m; ++r) tb.t.row(m) -= tb.t.row(r);
  for (int r = 0; r < m; ++r) tb.t(m, n + r) = 0.0;
  tb.optimize(n + m, tol);
  if (-tb.t(m, n + m) > 1e3 * tol * (1.0 + b.cwiseAbs().sum())) return res;

  // Drive remaining artificials out of the basis where possible.
  for (int r = 0; r < m; ++r)
    if (tb.basis[r] >= n)
      for (int c = 0; c < n; ++c)
        if (std::abs(tb.t(r, c)) > tol) {
          tb.pivot(r, c);
          break;
        }

  // Phase 2 objective in reduced form.
  tb.t.row(m).setZero();
  tb.t.row(m).head(n) = c.transpose();
  for (int r = 0; r < m; ++r)
    if (tb.basis[r] < n) tb.t.row(m) -= c[tb.basis[r]] * tb.t.row(r);
  // Artificial columns are excluded by only allowing the first n columns to enter.
  if (!tb.optimize(n, tol)) {
    res.status = LpResult::Status::Unbounded;
    return res;
  }
  res.status = LpResult::Status::Optimal;
  res.x = Vec::Zero(n);
  for (int r = 0; r < m; ++r)
    if (tb.basis[r] < n) res.x[tb.basis[r]] = tb.t(r, n + m);
  res.value = c.dot(res.x);
  return res;
}

}  // namespace mmlyap::detail
