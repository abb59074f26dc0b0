#include "mmlyap/filippov.hpp"

#include "mmlyap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>

namespace mmlyap {

int surface_id(int M, int i, int j) {
  if (i > j) std::swap(i, j);
  if (i < 1 || j > M || i == j) throw InvalidInput("surface needs two distinct modes");
  int id = 0;
  for (int a = 1; a <= M; ++a)
    for (int b = a + 1; b <= M; ++b) {
      ++id;
      if (a == i && b == j) return id;
    }
  return id;
}

Regime Regime::sliding(int i, int j, int m) {
  if (i > j) std::swap(i, j);
  return {Kind::Sliding, i, j, surface_id(m, i, j)};
}

std::string Regime::str() const {
  return kind == Kind::Mode ? "Mode(" + std::to_string(i) + ")" : "Sliding(" + std::to_string(surface) + ")";
}

const char* status_name(Trajectory::Status s) {
  switch (s) {
    case Trajectory::Status::Completed:
      return "completed";
    case Trajectory::Status::LeftDomain:
      return "left-domain";
    case Trajectory::Status::Stall:
      return "stall";
  }
  return "?";
}

SlidingTest sliding_test(const SwitchedSystem& sys, const Vec& x, int i, int j, const NumericPolicy& policy) {
  if (i > j) std::swap(i, j);
  if (sys.mode(i).region == Mode::Region::All)
    throw PreconditionError("mode " + std::to_string(i) + " covers the whole space; there is no switching surface");
  const Vec n = sys.region_grad(i, x);
  const Vec fi = sys.field(i, x), fj = sys.field(j, x);
  SlidingTest st;
  st.a = n.dot(fi);
  st.b = n.dot(fj);
  const double scale = n.norm() * std::max(fi.norm(), fj.norm());
  const double tol = 10.0 * (policy.abs + policy.rel) * scale;
  if (std::abs(st.a) <= tol && std::abs(st.b) <= tol) {
    st.tangent = true;
    return st;
  }
  if (st.a * st.b <= 0.0) st.lambda = st.b / (st.b - st.a);
  return st;
}

std::optional<double> sliding_lambda(const SwitchedSystem& sys, const Vec& x, int surface,
                                     const NumericPolicy& policy) {
  const int M = sys.size();
  for (int a = 1; a <= M; ++a)
    for (int b = a + 1; b <= M; ++b)
      if (surface_id(M, a, b) == surface) return sliding_test(sys, x, a, b, policy).lambda;
  throw InvalidInput("unknown surface id " + std::to_string(surface));
}

namespace {

double lambda_at(const SwitchedSystem& sys, const Regime& r, const Vec& x) {
  const Vec n = sys.region_grad(r.i, x);
  const double a = n.dot(sys.field(r.i, x));
  const double b = n.dot(sys.field(r.j, x));
  return b == a ? 0.5 : b / (b - a);
}

}  // namespace

Vec regime_velocity(const SwitchedSystem& sys, const Regime& r, const Vec& x, const NumericPolicy& /*policy*/) {
  if (r.kind == Regime::Kind::Mode) return sys.field(r.i, x);
  const double l = lambda_at(sys, r, x);
  return l * sys.field(r.i, x) + (1.0 - l) * sys.field(r.j, x);
}

namespace {

using Field = std::function<Vec(const Vec&)>;

struct StepResult {
  Vec x;
  double err = 0.0;
};

// One Dormand-Prince 5(4) step; err is the scaled embedded error estimate.
StepResult dp45(const Field& f, const Vec& x, double h, double rtol, double atol) {
  const Vec k1 = f(x);
  const Vec k2 = f(x + h * (1.0 / 5.0) * k1);
  const Vec k3 = f(x + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const Vec k4 = f(x + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const Vec k5 =
      f(x + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
  const Vec k6 = f(x + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                            5103.0 / 18656.0 * k5));
  const Vec x5 =
      x + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
  const Vec k7 = f(x5);
  const Vec x4 = x + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4 -
                          92097.0 / 339200.0 * k5 + 187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
  StepResult r;
  r.x = x5;
  for (int i = 0; i < x.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(x5[i]));
    r.err = std::max(r.err, std::abs(x5[i] - x4[i]) / sc);
  }
  return r;
}

// Newton projection onto {H_i = 0}.
Vec project(const SwitchedSystem& sys, int i, Vec x) {
  for (int it = 0; it < 3; ++it) {
    const double g = sys.region_value(i, x);
    const Vec n = sys.region_grad(i, x);
    const double nn = n.squaredNorm();
    if (nn == 0.0) break;
    x -= (g / nn) * n;
  }
  return x;
}

class Integrator {
 public:
  Integrator(const SwitchedSystem& sys, const SimOptions& o) : sys_(sys), o_(o) {}

  Trajectory run(const Vec& x0) {
    require_finite(x0, "initial state");
    if (x0.size() != sys_.dim()) throw InvalidInput("initial state has the wrong dimension");
    if (!(o_.horizon > 0) || !(o_.max_step > 0) || !(o_.event_tol > 0))
      throw InvalidInput("horizon, max step and event tolerance must be positive");

    x_ = x0;
    t_ = 0.0;
    if (!initial_regime()) {
      push_sample();
      return std::move(traj_);
    }
    push_sample();

    double h = std::min(o_.max_step, o_.horizon) * 0.1;
    const double hmin = 1e-14;
    for (long iter = 0; t_ < o_.horizon; ++iter) {
      if (iter > 20000000) return stall("step budget exhausted");
      if (x_.norm() > 1e9) {
        traj_.status = Trajectory::Status::LeftDomain;
        traj_.message = "state norm exceeded 1e9";
        return std::move(traj_);
      }
      h = std::min({h, o_.max_step, o_.horizon - t_});
      const Field f = [&](const Vec& y) { return regime_velocity(sys_, regime_, y, o_.policy); };
      const StepResult sr = dp45(f, x_, h, o_.rtol, o_.atol);
      if (!sr.x.allFinite() || sr.err > 1.0) {
        h *= sr.x.allFinite() ? std::max(0.2, 0.9 * std::pow(sr.err, -0.2)) : 0.1;
        if (h < hmin * (1.0 + t_)) return stall("step size underflow at t = " + format_double(t_));
        continue;
      }
      const double grow = sr.err > 0 ? std::min(5.0, 0.9 * std::pow(sr.err, -0.2)) : 5.0;

      if (regime_.kind == Regime::Kind::Mode) {
        const int i = regime_.i;
        if (exits(i, sr.x)) {
          if (!locate_crossing(f, h, sr.x)) return std::move(traj_);
          if (o_.max_crossings > 0 && crossings_ >= o_.max_crossings) return std::move(traj_);
          continue;
        }
        x_ = sr.x;
      } else {
        const Vec xn = project(sys_, regime_.i, sr.x);
        const SlidingTest st = sliding_test(sys_, xn, regime_.i, regime_.j, o_.policy);
        if (!st.lambda && !st.tangent) {
          locate_slide_exit(f, h);
          continue;
        }
        x_ = xn;
      }
      t_ += h;
      if (o_.horizon - t_ < 1e-15 * std::max(1.0, o_.horizon)) t_ = o_.horizon;
      push_sample();
      h *= grow;
    }
    return std::move(traj_);
  }

 private:
  bool exits(int i, const Vec& x) const {
    if (sys_.mode(i).region == Mode::Region::All) return false;
    return sys_.region_value(i, x) < -sys_.closure_band(i, x, o_.policy.abs);
  }

  double event_scale(const Vec& x) const { return o_.event_tol * std::max(1e-300, x.squaredNorm()); }

  bool initial_regime() {
    const std::vector<int> idx = index_set(sys_, x_, o_.policy);
    if (idx.size() == 1) {
      regime_ = Regime::mode(idx[0]);
      return true;
    }
    if (idx.size() > 2) {
      stall("initial state lies where " + std::to_string(idx.size()) + " regions meet");
      return false;
    }
    const int i = idx[0], j = idx[1];
    const SlidingTest st = sliding_test(sys_, x_, i, j, o_.policy);
    if (st.tangent) {
      traj_.warnings.push_back("both fields tangent to the surface at the initial state; starting in mode " +
                               std::to_string(i));
      regime_ = Regime::mode(i);
    } else if (st.lambda) {
      regime_ = Regime::sliding(i, j, sys_.size());
      x_ = project(sys_, i, x_);
    } else {
      regime_ = Regime::mode(st.a > 0 ? i : j);
    }
    return true;
  }

  bool locate_crossing(const Field& f, double h, const Vec& overshoot) {
    const int i = regime_.i;
    double lo = 0.0, hi = h;
    Vec xb = overshoot;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vec xm = dp45(f, x_, mid, o_.rtol, o_.atol).x;
      const double g = sys_.region_value(i, xm);
      if (g >= 0.0)
        lo = mid;
      else
        hi = mid;
      xb = xm;
      if (std::abs(g) <= event_scale(xm) || hi - lo <= 1e-16 * (1.0 + t_)) break;
    }
    const double s = 0.5 * (lo + hi);
    Vec xc = project(sys_, i, dp45(f, x_, s, o_.rtol, o_.atol).x);
    t_ += s;
    x_ = xc;

    const std::vector<int> idx = index_set(sys_, x_, o_.policy);
    int j = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= sys_.size(); ++k) {
      if (k == i) continue;
      const double hk = sys_.region_value(k, overshoot);
      if (hk > best) {
        best = hk;
        j = k;
      }
    }
    int others = 0;
    for (int k : idx)
      if (k != i) ++others;
    if (others > 1) {
      stall("reached a point where " + std::to_string(idx.size()) + " regions meet");
      return false;
    }

    const Regime from = regime_;
    const SlidingTest st = sliding_test(sys_, x_, i, j, o_.policy);
    switches_.push_back(t_);
    while (!switches_.empty() && switches_.front() < t_ - o_.max_step) switches_.pop_front();
    const bool chatter = static_cast<int>(switches_.size()) > o_.chatter_limit;

    TrajectoryEvent ev;
    ev.t = t_;
    ev.x = x_;
    ev.from = from;
    if ((st.lambda && *st.lambda > 0.0 && *st.lambda < 1.0) || chatter) {
      if (chatter && !st.lambda) traj_.warnings.push_back("chattering detected; forcing sliding at t = " + format_double(t_));
      regime_ = Regime::sliding(i, j, sys_.size());
      ev.kind = TrajectoryEvent::Kind::SlideStart;
      switches_.clear();
    } else {
      if (st.tangent) traj_.warnings.push_back("tangential contact at t = " + format_double(t_));
      regime_ = Regime::mode(j);
      ev.kind = TrajectoryEvent::Kind::Crossing;
      ++crossings_;
    }
    ev.to = regime_;
    traj_.events.push_back(ev);
    push_sample();
    return true;
  }

  void locate_slide_exit(const Field& f, double h) {
    const int i = regime_.i, j = regime_.j;
    double lo = 0.0, hi = h;
    for (int it = 0; it < 60 && hi - lo > 1e-16 * (1.0 + t_); ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vec xm = project(sys_, i, dp45(f, x_, mid, o_.rtol, o_.atol).x);
      const SlidingTest st = sliding_test(sys_, xm, i, j, o_.policy);
      if (st.lambda || st.tangent)
        lo = mid;
      else
        hi = mid;
    }
    const Vec xh = project(sys_, i, dp45(f, x_, hi, o_.rtol, o_.atol).x);
    const SlidingTest after = sliding_test(sys_, xh, i, j, o_.policy);
    x_ = project(sys_, i, dp45(f, x_, lo, o_.rtol, o_.atol).x);
    t_ += lo;
    push_sample();

    TrajectoryEvent ev;
    ev.kind = TrajectoryEvent::Kind::SlideEnd;
    ev.t = t_;
    ev.x = x_;
    ev.from = regime_;
    // Both normal components positive: the fields point into D_i.
    regime_ = Regime::mode(after.a > 0 && after.b > 0 ? i : (after.a < 0 && after.b < 0 ? j : (after.a > 0 ? i : j)));
    ev.to = regime_;
    traj_.events.push_back(ev);
    // Nudge the time so the next step starts strictly after the exit.
    push_sample();
  }

  void push_sample() {
    TrajectorySample s;
    s.t = t_;
    s.x = x_;
    s.regime = regime_;
    if (regime_.kind == Regime::Kind::Sliding) s.lambda = lambda_at(sys_, regime_, x_);
    if (!traj_.samples.empty() && traj_.samples.back().t == s.t) {
      traj_.samples.back() = s;
      return;
    }
    traj_.samples.push_back(std::move(s));
  }

  Trajectory stall(const std::string& why) {
    traj_.status = Trajectory::Status::Stall;
    traj_.message = why;
    return std::move(traj_);
  }

  const SwitchedSystem& sys_;
  const SimOptions& o_;
  Trajectory traj_;
  Vec x_;
  double t_ = 0.0;
  Regime regime_;
  std::deque<double> switches_;
  int crossings_ = 0;
};

}  // namespace

Trajectory simulate(const SwitchedSystem& sys, const Vec& x0, const SimOptions& opts) {
  Integrator in(sys, opts);
  return in.run(x0);
}

std::string export_csv(const Trajectory& traj, const MaxMinSpec* spec, const Basis* basis) {
  if (traj.samples.empty()) throw PreconditionError("cannot export an empty trajectory");
  const bool with_v = spec && basis;
  const int n = static_cast<int>(traj.samples.front().x.size());
  std::string out = "t";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  out += ",regime,lambda";
  if (with_v) out += ",V";
  out += "\n";
  char buf[64];
  for (const auto& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.12g", s.t);
    out += buf;
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, ",%.12g", s.x[i]);
      out += buf;
    }
    out += "," + s.regime.str() + ",";
    if (s.regime.kind == Regime::Kind::Sliding) {
      std::snprintf(buf, sizeof buf, "%.12g", s.lambda);
      out += buf;
    }
    if (with_v) {
      std::snprintf(buf, sizeof buf, ",%.12g", eval(*spec, *basis, s.x));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace mmlyap
