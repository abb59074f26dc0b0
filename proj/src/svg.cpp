#include "mmlyap/svg.hpp"

#include "mmlyap/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mmlyap {

std::vector<Segment> contour(const std::function<double(double, double)>& f, double lo, double hi, int n, double level) {
  if (n < 2) throw InvalidInput("contour grid needs at least 2 nodes");
  const double h = (hi - lo) / (n - 1);
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) v[j * n + i] = f(lo + i * h, lo + j * h) - level;
  std::vector<Segment> out;
  auto cross = [&](double xa, double ya, double fa, double xb, double yb, double fb, double& x, double& y) {
    const double t = fa / (fa - fb);
    x = xa + t * (xb - xa);
    y = ya + t * (yb - ya);
  };
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const double x0 = lo + i * h, y0 = lo + j * h, x1 = x0 + h, y1 = y0 + h;
      // Corners counter-clockwise from bottom-left.
      const double c[4] = {v[j * n + i], v[j * n + i + 1], v[(j + 1) * n + i + 1], v[(j + 1) * n + i]};
      const double cx[4] = {x0, x1, x1, x0}, cy[4] = {y0, y0, y1, y1};
      double px[4], py[4];
      int k = 0;
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        if ((c[a] < 0) != (c[b] < 0)) {
          cross(cx[a], cy[a], c[a], cx[b], cy[b], c[b], px[k], py[k]);
          ++k;
        }
      }
      if (k == 2) {
        out.push_back({px[0], py[0], px[1], py[1]});
      } else if (k == 4) {
        // Saddle: the cell center decides which pairs connect.
        const double mid = 0.25 * (c[0] + c[1] + c[2] + c[3]);
        if ((mid < 0) == (c[0] < 0)) {
          out.push_back({px[0], py[0], px[1], py[1]});
          out.push_back({px[2], py[2], px[3], py[3]});
        } else {
          out.push_back({px[0], py[0], px[3], py[3]});
          out.push_back({px[1], py[1], px[2], py[2]});
        }
      }
    }
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string phase_portrait_svg(const Config& cfg, const std::vector<Trajectory>& trajectories, const SvgOptions& opts,
                               const std::string& header) {
  const SwitchedSystem& sys = cfg.system;
  if (sys.dim() != 2) throw PreconditionError("svg: planar systems only");
  const double e = opts.extent;
  const double W = opts.size;
  auto px = [&](double x) { return fmt((x + e) / (2 * e) * W); };
  auto py = [&](double y) { return fmt((e - y) / (2 * e) * W); };
  auto path = [&](const std::vector<Segment>& segs) {
    std::string d;
    for (const auto& s : segs) d += "M" + px(s.x0) + " " + py(s.y0) + "L" + px(s.x1) + " " + py(s.y1);
    return d;
  };

  std::ostringstream os;
  os << "<!-- " << header << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.size << "\" height=\"" << opts.size
     << "\" viewBox=\"0 0 " << opts.size << " " << opts.size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<path d=\"M0 " << fmt(W / 2) << "H" << fmt(W) << "M" << fmt(W / 2) << " 0V" << fmt(W)
     << "\" stroke=\"#ccc\" stroke-width=\"1\"/>\n";

  Vec x(2);
  auto at = [&](double a, double b) -> const Vec& {
    x << a, b;
    return x;
  };
  for (int i = 1; i <= sys.size(); ++i) {
    if (sys.mode(i).region == Mode::Region::All) continue;
    const auto segs = contour([&](double a, double b) { return sys.region_value(i, at(a, b)); }, -e, e, opts.grid, 0.0);
    os << "<path class=\"boundary\" d=\"" << path(segs) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\" fill=\"none\"/>\n";
  }

  if (cfg.basis && cfg.spec) {
    std::vector<double> levels = opts.levels;
    if (levels.empty()) {
      for (const auto& t : trajectories)
        if (!t.samples.empty()) levels.push_back(eval(*cfg.spec, *cfg.basis, t.samples.front().x));
      if (levels.empty()) levels.push_back(1.0);
    }
    for (double lv : levels) {
      const auto segs =
          contour([&](double a, double b) { return eval(*cfg.spec, *cfg.basis, at(a, b)); }, -e, e, opts.grid, lv);
      os << "<path class=\"level\" d=\"" << path(segs) << "\" stroke=\"#c0392b\" fill=\"none\"/>\n";
    }
  }

  const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  int c = 0;
  for (const auto& t : trajectories) {
    if (t.samples.empty()) continue;
    std::string d;
    for (std::size_t k = 0; k < t.samples.size(); ++k)
      d += (k ? "L" : "M") + px(t.samples[k].x[0]) + " " + py(t.samples[k].x[1]);
    os << "<path class=\"trajectory\" d=\"" << d << "\" stroke=\"" << colors[c++ % 5]
       << "\" stroke-width=\"1.5\" fill=\"none\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mmlyap
