#pragma once

#include "mmlyap/inclusion.hpp"
#include "mmlyap/maxmin.hpp"
#include "mmlyap/numkernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mmlyap {

/// Mode(i), or first-order sliding on the surface shared by modes i < j.
struct Regime {
  enum class Kind { Mode, Sliding };
  Kind kind = Kind::Mode;
  int i = 0;
  int j = 0;        // second mode when sliding
  int surface = 0;  // 1-based lexicographic index of the pair (i, j)

  static Regime mode(int i) { return {Kind::Mode, i, 0, 0}; }
  static Regime sliding(int i, int j, int m);
  std::string str() const;
  bool operator==(const Regime& o) const { return kind == o.kind && i == o.i && j == o.j; }
};

/// Lexicographic index of the mode pair (i, j), i < j, among M modes; 1-based.
int surface_id(int M, int i, int j);

struct TrajectorySample {
  double t = 0.0;
  Vec x;
  Regime regime;
  double lambda = 0.0;  // weight of the lower-index mode; meaningful only when sliding
};

struct TrajectoryEvent {
  enum class Kind { Crossing, SlideStart, SlideEnd };
  Kind kind = Kind::Crossing;
  double t = 0.0;
  Vec x;
  Regime from, to;
};

struct Trajectory {
  enum class Status { Completed, LeftDomain, Stall };
  std::vector<TrajectorySample> samples;
  std::vector<TrajectoryEvent> events;
  Status status = Status::Completed;
  std::string message;
  std::vector<std::string> warnings;
};

const char* status_name(Trajectory::Status s);

struct SimOptions {
  double horizon = 10.0;
  double max_step = 0.05;
  double event_tol = 1e-12;
  double rtol = 1e-10;
  double atol = 1e-12;
  int chatter_limit = 50;
  /// Stop after this many crossing events (0 = no limit).
  int max_crossings = 0;
  NumericPolicy policy;
};

struct SlidingTest {
  std::optional<double> lambda;  // present when the Filippov combination is tangent
  bool tangent = false;          // both normal components vanish
  double a = 0.0, b = 0.0;       // normal components of f_i and f_j
};

/// Filippov weight on the surface between modes i < j, using the normal grad H_i(x).
SlidingTest sliding_test(const SwitchedSystem& sys, const Vec& x, int i, int j, const NumericPolicy& policy);

/// Same, addressed by surface id.
std::optional<double> sliding_lambda(const SwitchedSystem& sys, const Vec& x, int surface,
                                     const NumericPolicy& policy);

Trajectory simulate(const SwitchedSystem& sys, const Vec& x0, const SimOptions& opts);

/// Velocity selected by the regime (the sliding combination when sliding).
Vec regime_velocity(const SwitchedSystem& sys, const Regime& r, const Vec& x, const NumericPolicy& policy);

/// Header t,x1..xn,regime,lambda[,V]; 12 significant digits.
std::string export_csv(const Trajectory& traj, const MaxMinSpec* spec = nullptr, const Basis* basis = nullptr);

}  // namespace mmlyap
