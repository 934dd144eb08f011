#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::flexibility {

/// One operating point in the (RoC, SoC) plane.
struct FlexPoint {
  double hours = 0.0;  ///< unwrapped time [h]
  double soc = 0.0;    ///< scaled [K]
  double roc = 0.0;    ///< scaled [K/min]
};

/// (T_b - T_b_min) * eta_inv.
double soc(double T_b, const whitebox::TowerParams& p);
/// Rate of change in K/min times eta_inv.
double roc(double dT_dt_per_min, const whitebox::TowerParams& p);

/// Points from a temperature trajectory and its derivative in K/s.
std::vector<FlexPoint> flex_series(std::span<const double> hours, std::span<const double> T_b,
                                   std::span<const double> dT_dt_per_s, const whitebox::TowerParams& p);

/// Mean |SoC_est - SoC_true| over the first `horizon` steps. Throws
/// ContractError on a length mismatch or a horizon beyond the data.
double soc_mae(std::span<const double> T_est, std::span<const double> T_true, std::size_t horizon,
               const whitebox::TowerParams& p);

/// Operating-limit rectangle.
struct FlexLimits {
  double roc_min = -10.0;
  double roc_max = 10.0;
  double soc_min = 0.0;
  double soc_max = 0.0;

  static FlexLimits from_params(const whitebox::TowerParams& p, double roc_min = -10.0, double roc_max = 10.0);
  bool contains(const FlexPoint& q) const {
    return q.roc >= roc_min && q.roc <= roc_max && q.soc >= soc_min && q.soc <= soc_max;
  }
};

enum class RegionShape { ConvexHull, BoundingBox };

RegionShape parse_region_shape(const std::string& s);  ///< hull | box
std::string to_string(RegionShape s);

struct Vertex {
  double roc = 0.0;
  double soc = 0.0;
  bool operator==(const Vertex&) const = default;
};

struct FlexRegion {
  RegionShape shape = RegionShape::ConvexHull;
  std::vector<Vertex> polygon;  ///< counter-clockwise, no repeated closing vertex
  double area = 0.0;
  FlexLimits limits;
  double inside_fraction = 0.0;  ///< share of points within the limits
  std::size_t point_count = 0;
};

/// Convex hull by Andrew's monotone chain; collinear points are dropped.
std::vector<Vertex> convex_hull(std::vector<Vertex> points);
/// Shoelace area of a simple polygon.
double polygon_area(std::span<const Vertex> polygon);

/// Throws ContractError on an empty point set.
FlexRegion flex_region(std::span<const FlexPoint> points, const FlexLimits& limits,
                       RegionShape shape = RegionShape::ConvexHull);

/// hours,soc,roc
void write_series_csv(std::span<const FlexPoint> points, const std::filesystem::path& path);
/// label,vertex,roc,soc
void write_regions_csv(std::span<const FlexRegion> regions, std::span<const std::string> labels,
                       const std::filesystem::path& path);
/// Limit rectangle plus one filled polygon per region.
void write_svg(std::span<const FlexRegion> regions, std::span<const std::string> labels,
               const std::filesystem::path& path);

}  // namespace coolflex::flexibility
