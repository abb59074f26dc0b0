#pragma once

// Worked examples compiled into the library so reproductions need no files.

#include "mmlyap/certify.hpp"
#include "mmlyap/config.hpp"

#include <string>

namespace mmlyap::fixtures {

/// Three-mode planar "shield" system with its max-min certificate
/// (K = 3, V = max{min{V1, V2}, V3}).
Config example1();
Candidate example1_candidate();
/// Initial point of the half-turn trajectory and the expected norms.
Vec example1_z0();

/// Two-mode planar system with an arctan perturbation of gain b and
/// V = min{V1, V2}. The switching lines are x2 = x1 (S1) and x2 = -x1 (S2).
Config example2(double b);

/// Three-dimensional two-mode system, V = max{V1, V2}.
Config example3();
Candidate example3_candidate();

/// One-dimensional system with constant fields f1 on x < 0 and f2 on x > 0,
/// and V = max{x, -x} written as expressions.
Config example31(double f1, double f2);

/// Config text for a fixture, as the configuration language would spell it.
std::string text(const Config& cfg);

}  // namespace mmlyap::fixtures
