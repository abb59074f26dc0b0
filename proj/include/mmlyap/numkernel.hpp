#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace mmlyap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Tolerances and sampling knobs shared by every verdict-producing routine.
///
/// Every verdict in the library is a pure function of its inputs and one of
/// these records, so a report can be reproduced from the policy it prints.
struct NumericPolicy {
  double abs = 1e-9;
  double rel = 1e-9;
  /// Required strict margin for "< 0" / "> 0" verdicts.
  double margin = 1e-9;
  /// Perturbation directions per radius when sampling active index sets.
  int directions = 64;
  std::uint64_t seed = 1;

  /// Scale-aware tie test: |a - b| <= abs + rel * scale.
  bool tie(double a, double b, double scale) const noexcept;
};

/// Dense symmetric matrix. Construction checks symmetry and finiteness and
/// stores the exactly symmetrized entries.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Mat& m);

  static SymMatrix identity(int n);
  static SymMatrix zero(int n);
  static SymMatrix diagonal(const Vec& d);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Mat& mat() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// x^T M x
  double quad(const Vec& x) const;

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator-() const;
  SymMatrix operator*(double s) const;

 private:
  Mat m_;
};

inline SymMatrix operator*(double s, const SymMatrix& m) { return m * s; }

struct Spectrum {
  Vec values;   // ascending
  Mat vectors;  // column k pairs with values[k]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
Spectrum eig_sym(const SymMatrix& m);

/// Matrix exponential e^{A t}, scaling and squaring with a [6/6] Pade approximant.
Mat expm(const Mat& a, double t);

/// Largest eigenvalue; M is negative definite iff the result is < 0.
double negdef_margin(const SymMatrix& m);

/// Smallest absolute eigenvalue (= smallest singular value for symmetric M).
double min_abs_eigenvalue(const SymMatrix& m);

/// Solves A x = b; throws InvalidInput when A is numerically singular.
Vec solve(const Mat& a, const Vec& b);

/// Solves A^T P + P A = -Q for symmetric P via the Kronecker form.
SymMatrix lyapunov(const Mat& a, const SymMatrix& q);

/// Symmetric part (A + A^T) / 2 as a SymMatrix.
SymMatrix sym_part(const Mat& a);

/// A^T P + P A
SymMatrix lyap_form(const Mat& a, const SymMatrix& p);

void require_finite(const Mat& m, const char* what);
void require_finite(const Vec& v, const char* what);

}  // namespace mmlyap
