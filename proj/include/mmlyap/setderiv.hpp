#pragma once

#include "mmlyap/inclusion.hpp"
#include "mmlyap/maxmin.hpp"
#include "mmlyap/numkernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mmlyap {

/// Solutions lambda in the probability simplex of the homogeneous system
/// sum_j lambda_j (grad V_{l_{k+1}} - grad V_{l_k})^T f_j = 0.
struct SimplexSet {
  enum class Kind { Empty, Point, Segment, Polytope, FullSimplex };
  Kind kind = Kind::Empty;
  int m = 0;
  std::vector<Vec> vertices;
  /// Normalized constraint rows (one per retained equation).
  Mat constraints;
  /// True when m is too large for vertex enumeration; vertices is then empty
  /// and queries go through the LP.
  bool implicit = false;

  bool empty() const { return kind == Kind::Empty; }
};

const char* kind_name(SimplexSet::Kind k);

/// Low-level form: gradients of the essentially-active base functions and the Filippov vertices.
SimplexSet lambda_set(const std::vector<Vec>& grads, const std::vector<Vec>& fields, const NumericPolicy& policy);

/// Set-valued Lie derivative. Empty encodes "max of the empty set = -infinity".
struct LieSet {
  bool empty = true;
  double lo = 0.0, hi = 0.0;
  Vec lo_witness, hi_witness;  // lambda vectors
  double spread = 0.0;         // worst disagreement across active indices
};

LieSet lie_set(const std::vector<Vec>& grads, const std::vector<Vec>& fields, const NumericPolicy& policy);

LieSet lie_derivative(const MaxMinSpec& spec, const Basis& basis, const SwitchedSystem& sys, const Vec& x,
                      const NumericPolicy& policy);

struct ClarkeSet {
  double lo = 0.0, hi = 0.0;
};

ClarkeSet clarke_set(const std::vector<Vec>& grads, const std::vector<Vec>& fields);

ClarkeSet clarke_derivative(const MaxMinSpec& spec, const Basis& basis, const SwitchedSystem& sys, const Vec& x,
                            const NumericPolicy& policy);

struct DecreasePoint {
  Vec x;
  std::optional<double> value;  // nullopt = -infinity
  double bound = 0.0;           // -rate * |x|^2
  bool violated = false;
};

struct DecreaseReport {
  std::vector<DecreasePoint> points;
  int violations = 0;
  bool clarke = false;
  double rate = 0.0;
  /// Sampling can refute the decrease condition but proves it only for conic linear systems.
  std::string note;
};

/// Checks max(derivative set) < -rate * |x|^2 at every sample point.
DecreaseReport decrease_check(const MaxMinSpec& spec, const Basis& basis, const SwitchedSystem& sys,
                              const std::vector<Vec>& points, double rate, bool use_clarke,
                              const NumericPolicy& policy);

}  // namespace mmlyap
