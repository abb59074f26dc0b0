#pragma once

#include "mmlyap/config.hpp"
#include "mmlyap/filippov.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mmlyap {

struct Segment {
  double x0, y0, x1, y1;
};

/// Marching squares over [lo, hi]^2 sampled on an n x n grid of nodes.
std::vector<Segment> contour(const std::function<double(double, double)>& f, double lo, double hi, int n, double level);

struct SvgOptions {
  double extent = 2.0;  // plots [-extent, extent]^2
  int grid = 400;
  int size = 480;       // pixels
  std::vector<double> levels;  // V level sets; empty: V at each trajectory start, or 1
};

/// Planar phase portrait: region boundaries, level sets of V and trajectories.
std::string phase_portrait_svg(const Config& cfg, const std::vector<Trajectory>& trajectories, const SvgOptions& opts,
                               const std::string& header);

}  // namespace mmlyap
