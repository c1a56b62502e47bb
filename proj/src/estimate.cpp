#include "linwalk/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace linwalk {
namespace {

// Windows wider than this accumulate with Neumaier compensation.
constexpr int kCompensatedWidth = 10000;

struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  [[nodiscard]] double value() const { return sum + carry; }
};

struct PlanarSums {
  double weighted_x = 0.0;
  double weighted_y = 0.0;
  double plain_x = 0.0;
  double plain_y = 0.0;
};

PlanarSums weighted_sums(std::span<const Vec2> xs) {
  const auto h = static_cast<std::int64_t>(xs.size());
  PlanarSums s;
  if (h > kCompensatedWidth) {
    CompensatedSum wx, wy, px, py;
    for (std::int64_t j = 1; j <= h; ++j) {
      const double w = static_cast<double>(mu_weight(h, j));
      const Vec2& p = xs[static_cast<std::size_t>(j - 1)];
      wx.add(w * p.x);
      wy.add(w * p.y);
      px.add(p.x);
      py.add(p.y);
    }
    return {wx.value(), wy.value(), px.value(), py.value()};
  }
  for (std::int64_t j = 1; j <= h; ++j) {
    const double w = static_cast<double>(mu_weight(h, j));
    const Vec2& p = xs[static_cast<std::size_t>(j - 1)];
    s.weighted_x += w * p.x;
    s.weighted_y += w * p.y;
    s.plain_x += p.x;
    s.plain_y += p.y;
  }
  return s;
}

double squared_residual_sum(std::span<const Vec2> xs, Vec2 mean, Vec2 slope, double center) {
  const bool compensated = xs.size() > static_cast<std::size_t>(kCompensatedWidth);
  CompensatedSum acc;
  double plain = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double offset = static_cast<double>(k + 1) - center;
    const Vec2 res = xs[k] - mean - slope * offset;
    if (compensated) {
      acc.add(res.squared_norm());
    } else {
      plain += res.squared_norm();
    }
  }
  return compensated ? acc.value() : plain;
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

Polar to_polar(Vec2 mu) {
  if (mu.x == 0.0 && mu.y == 0.0) return {0.0, 0.0};
  double theta = std::atan2(mu.y, mu.x);
  // atan2(-0.0, x<0) yields -pi; the half-open range is (-pi, pi].
  if (theta == -std::numbers::pi) theta = std::numbers::pi;
  return {theta, mu.norm()};
}

WindowEstimate lw_fit(std::span<const Vec2> positions, std::int64_t i) {
  const auto h = static_cast<std::int64_t>(positions.size());
  if (h < 3) {
    throw ValidationError("lw_fit: window width " + std::to_string(h) + " < 3");
  }
  const double hd = static_cast<double>(h);
  const double scale = 6.0 / (hd * hd * hd - hd);
  const PlanarSums s = weighted_sums(positions);

  WindowEstimate est;
  est.start = i;
  est.h = static_cast<int>(h);
  est.mu = {scale * s.weighted_x, scale * s.weighted_y};
  const Vec2 mean{s.plain_x / hd, s.plain_y / hd};
  const double center = (hd + 1.0) / 2.0;
  est.b = mean - est.mu * (static_cast<double>(i) + center);
  est.sigma2 = squared_residual_sum(positions, mean, est.mu, center) / (2.0 * hd - 4.0);
  const Polar polar = to_polar(est.mu);
  est.theta = polar.theta;
  est.r = polar.r;
  return est;
}

WindowEstimate rw_fit(std::span<const Vec2> increments, std::int64_t i) {
  const auto h = static_cast<std::int64_t>(increments.size());
  if (h < 2) {
    throw ValidationError("rw_fit: window width " + std::to_string(h) + " < 2");
  }
  const double hd = static_cast<double>(h);
  Vec2 total{};
  if (h > kCompensatedWidth) {
    CompensatedSum sx, sy;
    for (const auto& y : increments) {
      sx.add(y.x);
      sy.add(y.y);
    }
    total = {sx.value(), sy.value()};
  } else {
    for (const auto& y : increments) total += y;
  }

  WindowEstimate est;
  est.start = i;
  est.h = static_cast<int>(h);
  est.mu = total * (1.0 / hd);
  est.sigma2 = squared_residual_sum(increments, est.mu, Vec2{}, 0.0) / (2.0 * (hd - 1.0));
  const Polar polar = to_polar(est.mu);
  est.theta = polar.theta;
  est.r = polar.r;
  return est;
}

double robust_sigma2(const Track& track, int h, ModelKind kind,
                     std::span<const std::int64_t> exclusion) {
  if (h < 2) throw ValidationError("robust_sigma2: h must be >= 2");
  if (track.size() < 2 * static_cast<std::int64_t>(h) + 1) {
    throw ValidationError("robust_sigma2: track '" + track.id + "' has " +
                          std::to_string(track.size()) + " points, needs " +
                          std::to_string(2 * h + 1));
  }
  const std::vector<Vec2> incs = kind == ModelKind::rw ? increments(track) : std::vector<Vec2>{};
  // Data index d maps to time stamp first_t + d (LW) or first_t + 1 + d (RW).
  const std::span<const Vec2> data = kind == ModelKind::lw ? std::span<const Vec2>(track.positions)
                                                           : std::span<const Vec2>(incs);
  const std::int64_t data_first_t = kind == ModelKind::lw ? track.first_t : track.first_t + 1;
  const std::int64_t width = 2 * static_cast<std::int64_t>(h);
  const auto n = static_cast<std::int64_t>(data.size());

  std::vector<double> kept;
  kept.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n - width + 1, 0)));
  for (std::int64_t d = 0; d + width <= n; ++d) {
    const std::int64_t center = data_first_t + d + h - 1;
    const bool excluded = std::any_of(exclusion.begin(), exclusion.end(), [&](std::int64_t cp) {
      return std::abs(center - cp) <= width;
    });
    if (excluded) continue;
    const auto window = data.subspan(static_cast<std::size_t>(d), static_cast<std::size_t>(width));
    const std::int64_t i = data_first_t + d - 1;
    kept.push_back(kind == ModelKind::lw ? lw_fit(window, i).sigma2 : rw_fit(window, i).sigma2);
  }
  if (kept.empty()) {
    throw EstimationError("robust_sigma2: every window of track '" + track.id +
                          "' lies within 2h of an excluded change point");
  }
  return median_of(std::move(kept));
}

ModelSpec piecewise_refit(const Track& track, std::span<const std::int64_t> cps, int h,
                          ModelKind kind) {
  validate(track);
  std::int64_t prev = track.first_t - 1;
  for (const auto cp : cps) {
    if (cp <= prev || cp >= track.last_t()) {
      throw ValidationError("piecewise_refit: change points must be increasing and inside the track");
    }
    prev = cp;
  }

  struct Segment {
    std::int64_t first;
    std::int64_t last;
  };
  std::vector<Segment> segments;
  std::int64_t start = track.first_t;
  for (const auto cp : cps) {
    segments.push_back({start, cp});
    start = cp + 1;
  }
  segments.push_back({start, track.last_t()});

  std::string short_segments;
  for (std::size_t j = 0; j < segments.size(); ++j) {
    if (segments[j].last - segments[j].first + 1 < 3) {
      short_segments += (short_segments.empty() ? "" : ", ") + std::to_string(j + 1) + " [" +
                        std::to_string(segments[j].first) + ", " +
                        std::to_string(segments[j].last) + "]";
    }
  }
  if (!short_segments.empty()) {
    throw EstimationError("piecewise_refit: segments with fewer than 3 points: " + short_segments);
  }

  const std::vector<Vec2> incs = kind == ModelKind::rw ? increments(track) : std::vector<Vec2>{};
  ModelSpec spec;
  spec.kind = kind;
  spec.horizon = track.size();
  const std::int64_t shift = track.first_t - 1;
  for (const auto cp : cps) spec.change_points.push_back(cp - shift);

  double pooled_ss = 0.0, pooled_df = 0.0;
  for (std::size_t j = 0; j < segments.size(); ++j) {
    const auto& seg = segments[j];
    WindowEstimate est;
    if (kind == ModelKind::lw) {
      const auto offset = static_cast<std::size_t>(seg.first - track.first_t);
      const auto len = static_cast<std::size_t>(seg.last - seg.first + 1);
      est = lw_fit(std::span<const Vec2>(track.positions).subspan(offset, len), seg.first - 1);
    } else {
      // Increment Y_t (t >= first_t + 1) sits at incs[t - first_t - 1].
      const std::int64_t from = std::max(seg.first, track.first_t + 1);
      const auto offset = static_cast<std::size_t>(from - track.first_t - 1);
      const auto len = static_cast<std::size_t>(seg.last - from + 1);
      est = rw_fit(std::span<const Vec2>(incs).subspan(offset, len), from - 1);
    }
    const double df = kind == ModelKind::lw ? 2.0 * est.h - 4.0 : 2.0 * (est.h - 1);
    pooled_ss += df * est.sigma2;
    pooled_df += df;
    spec.thetas.push_back(est.theta);
    spec.step_lengths.push_back(est.r);
    if (j == 0) {
      spec.b1 = kind == ModelKind::lw ? est.b + est.mu * static_cast<double>(shift)
                                      : track.positions.front() - est.mu;
    }
  }
  // Dense change points can leave no window clear of them; the pooled
  // within-segment variance is used then.
  const double pooled = pooled_ss / pooled_df;
  spec.sigma2 = pooled;
  if (track.size() >= 2 * static_cast<std::int64_t>(h) + 1) {
    try {
      spec.sigma2 = robust_sigma2(track, h, kind, cps);
    } catch (const EstimationError&) {
      spec.sigma2 = pooled;
    }
  }
  return spec;
}

}  // namespace linwalk
