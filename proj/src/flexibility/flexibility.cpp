#include "coolflex/flexibility/flexibility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "coolflex/errors.hpp"

namespace coolflex::flexibility {
namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot open " + path.string() + " for writing");
  return out;
}

double cross(const Vertex& o, const Vertex& a, const Vertex& b) {
  return (a.roc - o.roc) * (b.soc - o.soc) - (a.soc - o.soc) * (b.roc - o.roc);
}

}  // namespace

double soc(double T_b, const whitebox::TowerParams& p) { return (T_b - p.T_b_min) * p.eta_inv; }

double roc(double dT_dt_per_min, const whitebox::TowerParams& p) { return dT_dt_per_min * p.eta_inv; }

std::vector<FlexPoint> flex_series(std::span<const double> hours, std::span<const double> T_b,
                                   std::span<const double> dT_dt_per_s, const whitebox::TowerParams& p) {
  if (hours.size() != T_b.size() || T_b.size() != dT_dt_per_s.size()) {
    throw ContractError("flex_series: input lengths differ");
  }
  std::vector<FlexPoint> out;
  out.reserve(T_b.size());
  for (std::size_t i = 0; i < T_b.size(); ++i) {
    out.push_back({hours[i], soc(T_b[i], p), roc(60.0 * dT_dt_per_s[i], p)});
  }
  return out;
}

double soc_mae(std::span<const double> T_est, std::span<const double> T_true, std::size_t horizon,
               const whitebox::TowerParams& p) {
  if (T_est.size() != T_true.size()) throw ContractError("soc_mae: trajectory lengths differ");
  if (horizon == 0 || horizon > T_est.size()) throw ContractError("soc_mae: horizon outside the trajectory");
  double sum = 0.0;
  for (std::size_t i = 0; i < horizon; ++i) sum += std::abs(soc(T_est[i], p) - soc(T_true[i], p));
  return sum / static_cast<double>(horizon);
}

FlexLimits FlexLimits::from_params(const whitebox::TowerParams& p, double roc_min, double roc_max) {
  if (!(roc_min < roc_max)) throw ConfigError("flex limits: roc_min must be below roc_max");
  return {roc_min, roc_max, 0.0, soc(p.T_b_max, p)};
}

RegionShape parse_region_shape(const std::string& s) {
  if (s == "hull") return RegionShape::ConvexHull;
  if (s == "box") return RegionShape::BoundingBox;
  throw ConfigError("region shape must be 'hull' or 'box', got '" + s + "'");
}

std::string to_string(RegionShape s) { return s == RegionShape::ConvexHull ? "hull" : "box"; }

std::vector<Vertex> convex_hull(std::vector<Vertex> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vertex& a, const Vertex& b) {
    return a.roc < b.roc || (a.roc == b.roc && a.soc < b.soc);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Vertex> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vertex& v : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], v) <= 0.0) --k;
    hull[k++] = v;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(std::span<const Vertex> poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vertex& a = poly[i];
    const Vertex& b = poly[(i + 1) % poly.size()];
    twice += a.roc * b.soc - b.roc * a.soc;
  }
  return std::abs(twice) / 2.0;
}

FlexRegion flex_region(std::span<const FlexPoint> points, const FlexLimits& limits, RegionShape shape) {
  if (points.empty()) throw ContractError("flex_region: no points");
  FlexRegion r;
  r.shape = shape;
  r.limits = limits;
  r.point_count = points.size();
  std::size_t inside = 0;
  std::vector<Vertex> verts;
  verts.reserve(points.size());
  for (const FlexPoint& q : points) {
    if (!std::isfinite(q.roc) || !std::isfinite(q.soc)) throw ContractError("flex_region: non-finite point");
    verts.push_back({q.roc, q.soc});
    if (limits.contains(q)) ++inside;
  }
  r.inside_fraction = static_cast<double>(inside) / static_cast<double>(points.size());
  if (shape == RegionShape::ConvexHull) {
    r.polygon = convex_hull(std::move(verts));
  } else {
    auto [rmin, rmax] = std::minmax_element(verts.begin(), verts.end(),
                                            [](const Vertex& a, const Vertex& b) { return a.roc < b.roc; });
    auto [smin, smax] = std::minmax_element(verts.begin(), verts.end(),
                                            [](const Vertex& a, const Vertex& b) { return a.soc < b.soc; });
    r.polygon = {{rmin->roc, smin->soc}, {rmax->roc, smin->soc}, {rmax->roc, smax->soc}, {rmin->roc, smax->soc}};
  }
  r.area = polygon_area(r.polygon);
  return r;
}

void write_series_csv(std::span<const FlexPoint> points, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "hours,soc,roc\n";
  for (const FlexPoint& q : points) out << fmt(q.hours) << ',' << fmt(q.soc) << ',' << fmt(q.roc) << '\n';
}

void write_regions_csv(std::span<const FlexRegion> regions, std::span<const std::string> labels,
                       const std::filesystem::path& path) {
  if (regions.size() != labels.size()) throw ContractError("write_regions_csv: one label per region");
  std::ofstream out = open_out(path);
  out << "label,vertex,roc,soc\n";
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t v = 0; v < regions[i].polygon.size(); ++v) {
      out << labels[i] << ',' << v << ',' << fmt(regions[i].polygon[v].roc) << ',' << fmt(regions[i].polygon[v].soc)
          << '\n';
    }
  }
}

void write_svg(std::span<const FlexRegion> regions, std::span<const std::string> labels,
               const std::filesystem::path& path) {
  if (regions.empty()) throw ContractError("write_svg: no regions");
  if (regions.size() != labels.size()) throw ContractError("write_svg: one label per region");
  const FlexLimits& lim = regions.front().limits;
  double x0 = lim.roc_min, x1 = lim.roc_max, y0 = lim.soc_min, y1 = lim.soc_max;
  for (const FlexRegion& r : regions) {
    for (const Vertex& v : r.polygon) {
      x0 = std::min(x0, v.roc), x1 = std::max(x1, v.roc);
      y0 = std::min(y0, v.soc), y1 = std::max(y1, v.soc);
    }
  }
  const double width = 600.0, height = 400.0, pad = 40.0;
  const auto sx = [&](double x) { return pad + (x - x0) / (x1 - x0) * (width - 2 * pad); };
  const auto sy = [&](double y) { return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "  <rect id=\"limits\" x=\"" << fmt(sx(lim.roc_min)) << "\" y=\"" << fmt(sy(lim.soc_max)) << "\" width=\""
      << fmt(sx(lim.roc_max) - sx(lim.roc_min)) << "\" height=\"" << fmt(sy(lim.soc_min) - sy(lim.soc_max))
      << "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"4 2\"/>\n";
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    out << "  <polygon class=\"region\" data-label=\"" << labels[i] << "\" points=\"";
    for (std::size_t v = 0; v < regions[i].polygon.size(); ++v) {
      if (v) out << ' ';
      out << fmt(sx(regions[i].polygon[v].roc)) << ',' << fmt(sy(regions[i].polygon[v].soc));
    }
    out << "\" fill=\"" << color << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
    out << "  <text x=\"" << fmt(pad) << "\" y=\"" << fmt(16.0 + 16.0 * static_cast<double>(i)) << "\" fill=\"" << color
        << "\">" << labels[i] << "</text>\n";
  }
  out << "  <text x=\"" << fmt(width / 2) << "\" y=\"" << fmt(height - 8) << "\">RoC [K/min]</text>\n";
  out << "  <text x=\"4\" y=\"" << fmt(height / 2) << "\">SoC</text>\n";
  out << "</svg>\n";
}

}  // namespace coolflex::flexibility
