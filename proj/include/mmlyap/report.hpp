#pragma once

// Text renderings shared by the C API and the command line. Every report is
// "key = value" lines grouped in [sections], the same family as configs.

#include "mmlyap/certify.hpp"
#include "mmlyap/config.hpp"
#include "mmlyap/filippov.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mmlyap {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& s);

/// "# mmlyap <version> manifest=<hash> seed=<seed>"; prefix is the comment leader.
std::string output_header(const std::string& manifest, std::uint64_t seed, const std::string& prefix = "# ");

/// Result of a report: text plus whether the check it performed passed.
struct Report {
  std::string text;
  bool ok = true;
};

Report report_validate(const Config& cfg, const NumericPolicy& policy);
Report report_phi(const Config& cfg);
Report report_grad(const Config& cfg, const Vec& x, const NumericPolicy& policy);
Report report_lie(const Config& cfg, const Vec& x, const NumericPolicy& policy);

/// Sample points for decrease checks: unit directions plus every switching
/// and kink direction found on the circle (planar) or random directions.
std::vector<Vec> decrease_points(const Config& cfg, int samples, const NumericPolicy& policy);
Report report_decrease(const Config& cfg, int samples, bool clarke, double rate, const NumericPolicy& policy);

Report report_simulate(const Config& cfg, const Trajectory& traj);
Report report_decompose(const Config& cfg, const NumericPolicy& policy);

/// The certificate in config grammar with a trailing [report] section.
std::string certificate_text(const Config& cfg, const Certificate& cert);
Report report_certify(const Config& cfg, const CertifyOptions& opts, const NumericPolicy& policy);

/// Bundled reproductions: "example1", "example2", "example3".
Report reproduce(const std::string& name, const NumericPolicy& policy);

/// Half-turn of the shield example: crossing points z1..z3 and the contraction.
struct HalfTurn {
  std::vector<double> times;
  std::vector<Vec> points;
  double norm_z3 = 0.0;
  double beta = 0.0;
};
HalfTurn example1_half_turn();

}  // namespace mmlyap
