#include "mmlyap/numkernel.hpp"

#include "mmlyap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mmlyap {

bool NumericPolicy::tie(double a, double b, double scale) const noexcept {
  return std::abs(a - b) <= abs + rel * std::abs(scale);
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

SymMatrix::SymMatrix(const Mat& m) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw InvalidInput("symmetric matrix must be square with dim >= 1");
  require_finite(m, "symmetric matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw InvalidInput("matrix is not symmetric");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Mat::Identity(n, n)); }
SymMatrix SymMatrix::zero(int n) { return SymMatrix(Mat::Zero(n, n)); }
SymMatrix SymMatrix::diagonal(const Vec& d) { return SymMatrix(Mat(d.asDiagonal())); }

double SymMatrix::quad(const Vec& x) const {
  if (x.size() != m_.rows()) throw InvalidInput("quadratic form: dimension mismatch");
  return x.dot(m_ * x);
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (o.dim() != dim()) throw InvalidInput("dimension mismatch");
  SymMatrix r;
  r.m_ = m_ + o.m_;
  return r;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (o.dim() != dim()) throw InvalidInput("dimension mismatch");
  SymMatrix r;
  r.m_ = m_ - o.m_;
  return r;
}

SymMatrix SymMatrix::operator-() const {
  SymMatrix r;
  r.m_ = -m_;
  return r;
}

SymMatrix SymMatrix::operator*(double s) const {
  SymMatrix r;
  r.m_ = m_ * s;
  return r;
}

Spectrum eig_sym(const SymMatrix& sm) {
  const int n = sm.dim();
  Mat a = sm.mat();
  require_finite(a, "eig_sym");
  Mat v = Mat::Identity(n, n);

  const double norm = a.norm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * std::max(norm, 1e-300)) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        // Rotation angle chosen so that the (p,q) entry vanishes.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  Spectrum out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

Mat expm(const Mat& a, double t) {
  if (a.rows() != a.cols()) throw InvalidInput("expm: matrix must be square");
  require_finite(a, "expm");
  if (!std::isfinite(t)) throw InvalidInput("expm: non-finite time");
  const int n = static_cast<int>(a.rows());
  Mat x = a * t;

  // Scale so that the 1-norm is at most 1/2, then square back.
  const double norm1 = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / 0.5))));
  x /= std::ldexp(1.0, squarings);

  static constexpr double c[] = {1.0,
                                 1.0 / 2.0,
                                 5.0 / 44.0,
                                 1.0 / 66.0,
                                 1.0 / 792.0,
                                 1.0 / 15840.0,
                                 1.0 / 665280.0};
  const Mat id = Mat::Identity(n, n);
  Mat num = id * c[0];
  Mat den = id * c[0];
  Mat power = id;
  for (int k = 1; k <= 6; ++k) {
    power = power * x;
    num += c[k] * power;
    den += ((k % 2) ? -c[k] : c[k]) * power;
  }
  Mat r = den.partialPivLu().solve(num);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

double negdef_margin(const SymMatrix& m) { return eig_sym(m).values.maxCoeff(); }

double min_abs_eigenvalue(const SymMatrix& m) { return eig_sym(m).values.cwiseAbs().minCoeff(); }

Vec solve(const Mat& a, const Vec& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidInput("solve: dimension mismatch");
  require_finite(a, "solve");
  require_finite(b, "solve");
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw InvalidInput("solve: singular matrix");
  return lu.solve(b);
}

SymMatrix lyapunov(const Mat& a, const SymMatrix& q) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || q.dim() != n) throw InvalidInput("lyapunov: dimension mismatch");
  // vec(A^T P + P A) = (I kron A^T + A^T kron I) vec(P)
  Mat k = Mat::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) {
        k(i + j * n, r + j * n) += a(r, i);
        k(i + j * n, i + r * n) += a(r, j);
      }
  Vec rhs(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) rhs(i + j * n) = -q(i, j);
  Vec p = solve(k, rhs);
  Mat pm(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pm(i, j) = p(i + j * n);
  return SymMatrix(0.5 * (pm + pm.transpose()));
}

SymMatrix sym_part(const Mat& a) { return SymMatrix(0.5 * (a + a.transpose())); }

SymMatrix lyap_form(const Mat& a, const SymMatrix& p) {
  const Mat pa = p.mat() * a;
  return SymMatrix(pa + pa.transpose());
}

}  // namespace mmlyap
