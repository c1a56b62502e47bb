#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linwalk/model.hpp"
#include "linwalk/types.hpp"

namespace linwalk {

/// Closed-form estimates from one window.
///
/// For the Linear Walk the window holds positions X_{i+1} .. X_{i+h}; for the
/// Random Walk it holds increments Y_{i+1} .. Y_{i+h}. theta and r are the
/// polar form of mu. b is zero for the Random Walk.
struct WindowEstimate {
  std::int64_t start = 0;  // i
  int h = 0;
  Vec2 mu{};
  Vec2 b{};
  double sigma2 = 0.0;
  double theta = 0.0;
  double r = 0.0;
};

struct Polar {
  double theta = 0.0;
  double r = 0.0;
};

/// theta = atan2(mu.y, mu.x) in (-pi, pi], r = |mu|. The zero vector maps to
/// (0, 0).
[[nodiscard]] Polar to_polar(Vec2 mu);

/// Drift weight 2j - h - 1 for j = 1..h.
[[nodiscard]] constexpr std::int64_t mu_weight(std::int64_t h, std::int64_t j) {
  return 2 * j - h - 1;
}

/// Offset weight; b_hat = sum_j b_weight(h, i, j) X_{i+j} / (h^3 - h).
[[nodiscard]] constexpr std::int64_t b_weight(std::int64_t h, std::int64_t i, std::int64_t j) {
  return -6 * h * j - 12 * j * i - 6 * j + 4 * h * h + 6 * h * i + 6 * h + 6 * i + 2;
}

/// Linear Walk MLEs with the unbiased 1/(2h-4) variance. Requires h >= 3.
[[nodiscard]] WindowEstimate lw_fit(std::span<const Vec2> positions, std::int64_t i);

/// Random Walk mean and pooled variance 1/(2(h-1)) sum |Y - mu|^2.
/// Requires h >= 2.
[[nodiscard]] WindowEstimate rw_fit(std::span<const Vec2> increments, std::int64_t i = 0);

/// Median of the per-window variance estimates over all windows of width 2h,
/// dropping windows whose center lies within 2h of an excluded change point.
/// Window centers use the change point convention of the detector: center c
/// covers time stamps c-h+1 .. c+h (LW positions or RW increments).
[[nodiscard]] double robust_sigma2(const Track& track, int h, ModelKind kind,
                                   std::span<const std::int64_t> exclusion = {});

/// Per-segment direction and step length between the given change points
/// (time stamps of the last index of each left regime), plus a robust
/// variance. When the track is too short for robust_sigma2 or every window
/// is excluded, the pooled within-segment variance is used instead. The
/// result is re-indexed so that the first position has model index 1. It is not validated: a noise-free track yields sigma2 = 0.
[[nodiscard]] ModelSpec piecewise_refit(const Track& track, std::span<const std::int64_t> cps,
                                        int h, ModelKind kind);

}  // namespace linwalk
