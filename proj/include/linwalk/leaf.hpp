#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "linwalk/detect.hpp"
#include "linwalk/types.hpp"

namespace linwalk {

struct LeafMarker {
  std::int64_t index = 0;
  CpClass cls = CpClass::unclassified;
};

/// Direction and step-length differences between the left and right window
/// at every center, with delta-method standard errors of both differences.
struct LeafSeries {
  int h = 0;
  ModelKind kind = ModelKind::lw;
  std::vector<std::int64_t> centers;
  std::vector<double> d_theta;  // (-pi, pi]
  std::vector<double> d_r;      // r_right - r_left
  std::vector<double> se_theta;
  std::vector<double> se_r;
  std::vector<LeafMarker> markers;
};

/// Smaller signed angle from theta_left to theta_right, in (-pi, pi].
[[nodiscard]] double direction_difference(double theta_left, double theta_right);

/// Markers outside the valid center range are dropped.
[[nodiscard]] LeafSeries leaf_series(const Track& track, int h, ModelKind kind,
                                     std::span<const std::int64_t> detected = {});

/// Labels a change point from the standardized differences at cp. Each
/// component is compared against three times its median absolute value away
/// from all markers (further than 2h); when neither exceeds, the larger
/// relative deviation wins and exact ties go to direction.
[[nodiscard]] CpClass classify(const LeafSeries& series, std::int64_t cp);

/// Standalone SVG: d_r on x, d_theta on y, one polyline through the series
/// and one circle per marker.
[[nodiscard]] std::string leaf_svg(const LeafSeries& series, const std::string& title = "leaf plot");
void render_svg(const LeafSeries& series, const std::filesystem::path& path,
                const std::string& title = "leaf plot");

/// CSV with header i,d_r,d_theta after a format_version comment line.
[[nodiscard]] std::string leaf_csv(const LeafSeries& series);
void write_leaf_csv(const LeafSeries& series, const std::filesystem::path& path);

}  // namespace linwalk
