#pragma once

// Dense two-phase simplex for the small programs over the probability simplex.

#include "mmlyap/numkernel.hpp"

namespace mmlyap::detail {

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  Vec x;
  double value = 0.0;
};

/// minimize c^T x  subject to  A x = b, x >= 0.  Bland's rule; tol guards pivots.
LpResult lp_solve(const Mat& A, const Vec& b, const Vec& c, double tol = 1e-11);

}  // namespace mmlyap::detail
