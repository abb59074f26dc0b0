#pragma once

#include "mmlyap/numkernel.hpp"

#include <cmath>
#include <random>

namespace testing {

using mmlyap::Mat;
using mmlyap::SymMatrix;
using mmlyap::Vec;

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline Vec random_unit(std::mt19937_64& rng, int n) {
  Vec v = random_vec(rng, n);
  return v / v.norm();
}

inline Mat random_mat(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return m;
}

inline SymMatrix random_sym(std::mt19937_64& rng, int n, double scale = 1.0) {
  const Mat m = random_mat(rng, n, scale);
  return SymMatrix(0.5 * (m + m.transpose()));
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

inline Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

// Unit vector on the Example 1 line x2 = -(1 + sqrt 2) x1 with x1 > 0.
inline Vec example1_v1() {
  Vec v = vec2(1.0, -(1.0 + std::sqrt(2.0)));
  return v / v.norm();
}

}  // namespace testing
