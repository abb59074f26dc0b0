#pragma once

// Shared by the checker and the search.

#include "mmlyap/certify.hpp"

#include <vector>

namespace mmlyap::detail {

/// Generators of D_i and E_rho: Q_i (cone regions only) then P_{rho_{k+1}} - P_{rho_k}.
std::vector<SymMatrix> pair_generators(const SwitchedSystem& sys, const std::vector<SymMatrix>& P, int mode,
                                       const Permutation& rho);

/// Largest eigenvalue, with a closed form for 2x2.
double lam_max(const Mat& m);

/// Minimizes lambda_max(m0 + sum_j t_j g_j) over t >= 0. The result is
/// written to t (resized to g.size()); returns the attained value.
double fit_pair(const Mat& m0, const std::vector<Mat>& g, Vec& t, int rounds);

/// Negative when {x^T G x > 0 for all G} is (robustly) empty; scale free.
/// Plane: max over the circle of min_k u^T G_k u / |G_k|. Otherwise the
/// S-procedure value min over the simplex of lambda_max(sum mu_k G_k / |G_k|).
double emptiness_score(const std::vector<SymMatrix>& gens, int grid);

/// Minimizes lambda_max(sum mu_k G_k) over the probability simplex.
double sprocedure_min(const std::vector<Mat>& g, Vec& mu, int iterations);

}  // namespace mmlyap::detail
