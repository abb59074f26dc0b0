#pragma once

#include "mmlyap/config.hpp"
#include "mmlyap/inclusion.hpp"
#include "mmlyap/maxmin.hpp"
#include "mmlyap/setderiv.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmlyap {

/// Basis matrices plus S-procedure multipliers.
struct Candidate {
  std::vector<SymMatrix> P;
  Multipliers multipliers;
};

// ---------------------------------------------------------------------------
// Emptiness of D_i intersected with E_rho

struct ConeEmptiness {
  enum class Method { AngularSweep, SProcedure, Witness, Inconclusive };
  bool empty = false;
  Method method = Method::Inconclusive;
  Vec mu;       // S-procedure weights when empty by certificate
  Vec witness;  // a point inside every cone when nonempty
  double certificate_value = 0.0;
};

const char* method_name(ConeEmptiness::Method m);

/// Decides whether {x : x^T G_k x > 0 for all k} is empty. Vanishing forms are ignored.
/// Plane: exact sweep. Higher dimension: an S-procedure certificate
/// lambda_max(sum mu_k G_k) <= 0 proves emptiness; a sampled witness proves
/// nonemptiness; otherwise the set is treated as nonempty.
ConeEmptiness cone_intersection_empty(const std::vector<SymMatrix>& generators, const NumericPolicy& policy);

// ---------------------------------------------------------------------------
// Condition (i)

struct PairMargin {
  int mode = 0;
  Permutation rho;
  int phi = 0;
  bool vacuous = false;  // D_i and E_rho do not intersect
  ConeEmptiness emptiness;
  double margin = 0.0;  // lambda_max of the inequality matrix (meaningful when not vacuous)
  int inequality = 0;   // index into ConditionIReport::inequalities, -1 when vacuous
};

struct Inequality {
  SymMatrix matrix;
  double margin = 0.0;
  std::vector<std::size_t> pairs;  // indices into ConditionIReport::pairs
};

struct ConditionIReport {
  std::vector<PairMargin> pairs;
  std::vector<Inequality> inequalities;  // distinct matrices over nonvacuous pairs
  double worst = 0.0;                    // max margin over inequalities
  bool pass = false;
};

/// Builds A_i^T P_phi + P_phi A_i + sum_k tau_k (P_{rho_{k+1}} - P_{rho_k}) + beta Q_i.
SymMatrix condition_i_matrix(const SwitchedSystem& sys, const Candidate& c, int mode, const Permutation& rho,
                             int phi_index, const Vec& tau, double beta);

ConditionIReport check_condition_i(const SwitchedSystem& sys, const MaxMinSpec& spec, const Candidate& cand,
                                   const NumericPolicy& policy);

// ---------------------------------------------------------------------------
// Search for condition (i)

struct SearchOptions {
  int starts = 16;
  double time_budget = 60.0;  // seconds
  long max_evaluations = 4000000;
  double margin = 1e-6;
  NumericPolicy policy;
};

struct SearchResult {
  bool found = false;
  Candidate candidate;
  ConditionIReport report;
  double best_objective = 0.0;
  long evaluations = 0;
  int starts_used = 0;
  double seconds = 0.0;
  std::string note;
};

SearchResult search_condition_i(const SwitchedSystem& sys, const MaxMinSpec& spec, const SearchOptions& opts);

/// Given fixed matrices, chooses multipliers for every nonvacuous pair to
/// minimize its margin. Returns the candidate with those multipliers.
Candidate fit_multipliers(const SwitchedSystem& sys, const MaxMinSpec& spec, std::vector<SymMatrix> P,
                          const NumericPolicy& policy);

// ---------------------------------------------------------------------------
// Condition (ii), planar

/// Factorization Q = t1 t2^T + t2 t1^T of an indefinite 2x2 matrix.
std::pair<Vec, Vec> q_cone_decompose(const SymMatrix& q);

struct ConeChain {
  std::vector<int> modes;   // chain order c_1..c_M (1-based mode labels)
  std::vector<Vec> theta;   // theta_1..theta_M ordered by angle; theta_1 has first component >= 0
  std::vector<Vec> v;       // unit vectors spanning theta_k-perp
  /// Q_{c_k} = theta_k theta_{k+1}^T + theta_{k+1} theta_k^T with theta_{M+1} = wrap * theta_1.
  int wrap = -1;
  double reconstruction = 0.0;
};

/// Orders the lines of every Q_i into the cyclic chain; throws InvalidInput when inconsistent.
ConeChain cone_chain(const SwitchedSystem& sys, const NumericPolicy& policy);

struct PlanarPoint {
  int k = 0;                 // chain position, 1-based
  int mode_prev = 0, mode = 0;
  Vec v;
  std::vector<int> active;   // alpha_V(v)
  SimplexSet lambda;         // Lambda^k over (mode_prev, mode)
  std::optional<double> value;  // max of the second-condition form over Lambda^k
  bool pass = true;
};

struct PlanarReport {
  ConeChain chain;
  std::vector<PlanarPoint> points;
  bool pass = false;
};

PlanarReport planar_condition_ii(const SwitchedSystem& sys, const MaxMinSpec& spec, const Candidate& cand,
                                 const NumericPolicy& policy);

// ---------------------------------------------------------------------------
// Condition (ii), two modes in any dimension

struct ExclusionReport {
  int samples = 0;
  double min_product = 0.0;  // over unit z on the switching cone
  Vec argmin;
  bool pass = false;
};

ExclusionReport sliding_exclusion(const SwitchedSystem& sys, const NumericPolicy& policy, int samples);

struct TwoModeReport {
  ExclusionReport exclusion;
  double rank_margin = 0.0;  // min over pairs of sigma_min(P_a - P_b)
  std::pair<int, int> rank_pair{0, 0};
  bool rank_pass = false;
  bool pass = false;
};

TwoModeReport check_condition_ii_2mode(const SwitchedSystem& sys, const MaxMinSpec& spec, const Candidate& cand,
                                       const NumericPolicy& policy, int samples = 10000);

// ---------------------------------------------------------------------------
// Combined verdict

enum class Verdict { GasCertified, ConditionIOnly, NotCertified };
const char* verdict_name(Verdict v);

struct Certificate {
  Candidate candidate;
  ConditionIReport condition_i;
  std::optional<PlanarReport> planar;
  std::optional<TwoModeReport> two_mode;
  std::string condition_ii_note;
  Verdict verdict = Verdict::NotCertified;
  std::optional<SearchResult> search;
  NumericPolicy policy;
  int exclusion_samples = 10000;
};

struct CertifyOptions {
  bool search = false;
  SearchOptions search_options;
  int exclusion_samples = 10000;
};

/// Condition (i) (given or searched), then the applicable condition (ii) test.
Certificate certify(const SwitchedSystem& sys, const MaxMinSpec& spec, const std::optional<Candidate>& cand,
                    const CertifyOptions& opts, const NumericPolicy& policy);

/// Recomputes every margin from scratch and checks the stored verdict.
bool reverify(const SwitchedSystem& sys, const MaxMinSpec& spec, const Certificate& cert, std::string* why = nullptr);

}  // namespace mmlyap
