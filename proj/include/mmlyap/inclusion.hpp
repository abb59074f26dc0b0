#pragma once

#include "mmlyap/expr.hpp"
#include "mmlyap/numkernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mmlyap {

/// One subsystem: a vector field and the open region D_i = {H_i > 0} where it applies.
struct Mode {
  enum class Region { All, Cone, Function };

  std::vector<Expr> field;  // always populated; synthesized from A for linear modes
  std::optional<Mat> A;     // linear fast path
  Region region = Region::All;
  std::optional<SymMatrix> Q;  // Region::Cone: H_i = x^T Q x
  Expr H;                      // Region::Function
  std::vector<Expr> grad_H;
};

class SwitchedSystem {
 public:
  SwitchedSystem() = default;
  SwitchedSystem(int n, std::vector<Mode> modes);

  static Mode linear_mode(const Mat& a, std::optional<SymMatrix> q);
  static Mode expr_mode(std::vector<Expr> f, int n);

  int dim() const noexcept { return n_; }
  int size() const noexcept { return static_cast<int>(modes_.size()); }
  const Mode& mode(int i) const { return modes_.at(i - 1); }  // 1-based
  const std::vector<Mode>& modes() const { return modes_; }

  bool is_linear() const;
  bool is_conic() const;

  /// f_i(x), 1-based i.
  Vec field(int i, const Vec& x) const;
  /// H_i(x); +infinity for a region covering the whole space.
  double region_value(int i, const Vec& x) const;
  Vec region_grad(int i, const Vec& x) const;
  /// Tolerance band used for closure membership at x.
  double closure_band(int i, const Vec& x, double abs) const;

 private:
  int n_ = 0;
  std::vector<Mode> modes_;
};

/// {i : x in closure(D_i)}, 1-based and sorted. Throws CoverageError when empty.
std::vector<int> index_set(const SwitchedSystem& sys, const Vec& x, const NumericPolicy& policy);

struct FilippovSet {
  std::vector<int> indices;
  std::vector<Vec> vertices;
};

FilippovSet filippov_set(const SwitchedSystem& sys, const Vec& x, const NumericPolicy& policy);

struct PartitionReport {
  int samples = 0;
  int overlaps = 0;  // points strictly inside two regions
  int gaps = 0;      // points in no closure
  std::vector<std::string> messages;
  bool ok() const { return overlaps == 0 && gaps == 0; }
};

/// Samples the unit sphere (and a few radii for non-conic regions) to test that
/// regions are disjoint and their closures cover the space.
PartitionReport check_partition(const SwitchedSystem& sys, int samples, const NumericPolicy& policy);

}  // namespace mmlyap
