#pragma once

#include "mmlyap/expr.hpp"
#include "mmlyap/numkernel.hpp"

#include <string>
#include <vector>

namespace mmlyap {

enum class Polarity { MaxMin, MinMax };

/// Combinatorial structure of a max-min (or min-max) function.
/// Indices are 1-based to match the configuration language.
struct MaxMinSpec {
  int K = 0;
  std::vector<std::vector<int>> families;
  Polarity polarity = Polarity::MaxMin;

  /// Sorts each family, checks ranges and nonemptiness; throws InvalidInput.
  void validate() const;
  std::string str() const;
};

/// Ordering rho = (rho_1..rho_K), 1-based, read as V_{rho_1} < ... < V_{rho_K}.
using Permutation = std::vector<int>;

/// All K! permutations of 1..K in lexicographic order.
std::vector<Permutation> all_permutations(int K);

/// Index selected on the cone E_rho (the Phi map). Max-min polarity only.
int phi(const MaxMinSpec& spec, const Permutation& rho);

/// Distributes the outer operator over the inner one and prunes supersets.
MaxMinSpec dualize(const MaxMinSpec& spec);

/// The K base functions: either quadratic forms x^T P_k x or scalar expressions.
class Basis {
 public:
  Basis() = default;
  static Basis quadratic(std::vector<SymMatrix> p);
  static Basis expressions(std::vector<Expr> v, int n);

  int size() const noexcept { return static_cast<int>(quadratic_ ? p_.size() : v_.size()); }
  int dim() const noexcept { return n_; }
  bool is_quadratic() const noexcept { return quadratic_; }
  const SymMatrix& P(int k) const { return p_.at(k - 1); }  // 1-based
  const std::vector<SymMatrix>& matrices() const { return p_; }
  const std::vector<Expr>& expressions() const { return v_; }

  /// V_k(x), 1-based k.
  double value(int k, const Vec& x) const;
  Vec values(const Vec& x) const;
  /// Gradient of V_k at x.
  Vec grad(int k, const Vec& x) const;

 private:
  bool quadratic_ = true;
  int n_ = 0;
  std::vector<SymMatrix> p_;
  std::vector<Expr> v_;
  std::vector<std::vector<Expr>> grads_;
};

/// Nested max/min value given the K base values.
double eval_values(const MaxMinSpec& spec, const Vec& values);
double eval(const MaxMinSpec& spec, const Basis& basis, const Vec& x);

/// Index attaining the value, chosen as Phi would for the induced ordering.
/// Ties are broken toward the lower index.
int selected_index(const MaxMinSpec& spec, const Vec& values);

/// Ordering of 1..K by ascending value (ties by index).
Permutation ordering(const Vec& values);
bool strictly_ordered(const Vec& values);

struct ActiveSet {
  enum class Method { ExactSmooth, AngularSweep, PerturbationSampled };
  std::vector<int> indices;  // sorted, 1-based
  Method method = Method::ExactSmooth;
  std::vector<std::string> warnings;
};

const char* method_name(ActiveSet::Method m);

/// Essentially-active index set.
ActiveSet active_indices(const MaxMinSpec& spec, const Basis& basis, const Vec& x, const NumericPolicy& policy);

/// Indices tying with V(x) under the policy tolerance.
std::vector<int> equal_value_set(const MaxMinSpec& spec, const Basis& basis, const Vec& x,
                                 const NumericPolicy& policy);

struct GradientHull {
  std::vector<int> indices;
  std::vector<Vec> vertices;  // vertices[k] = grad V_{indices[k]}(x)
};

GradientHull clarke_gradient(const MaxMinSpec& spec, const Basis& basis, const Vec& x, const NumericPolicy& policy);

}  // namespace mmlyap
