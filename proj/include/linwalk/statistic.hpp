#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "linwalk/rng.hpp"
#include "linwalk/types.hpp"

namespace linwalk {

/// Bivariate moving difference statistic over the valid window centers.
///
/// Center i compares the window ending at i with the window starting at i+1,
/// so i is the last index of the left regime. For a track with time stamps
/// 1..T the LW centers are h..T-h; the RW centers start at h+1 because the
/// first increment needs X_0.
struct DifferenceProcess {
  int h = 0;
  ModelKind kind = ModelKind::lw;
  std::vector<std::int64_t> centers;
  std::vector<Vec2> values;

  [[nodiscard]] bool empty() const { return values.empty(); }
  /// max_i |G_{h,i}|_2, or 0 for an empty process.
  [[nodiscard]] double max_norm() const;
};

struct CenterRange {
  std::int64_t first = 0;
  std::int64_t last = -1;  // inclusive; empty when last < first
};

/// Valid centers for a track whose first time stamp is first_t and that has
/// n positions.
[[nodiscard]] CenterRange center_range(ModelKind kind, std::int64_t first_t, std::int64_t n, int h);

/// LW kernel statistic. With known_sigma2 the denominator uses the true
/// variance instead of the window estimates.
[[nodiscard]] DifferenceProcess g_process_lw(const Track& track, int h,
                                             std::optional<double> known_sigma2 = std::nullopt);
/// RW MOSUM statistic.
[[nodiscard]] DifferenceProcess g_process_rw(const Track& track, int h,
                                             std::optional<double> known_sigma2 = std::nullopt);
[[nodiscard]] DifferenceProcess g_process(const Track& track, int h, ModelKind kind);

/// Null process built from one noise array z[0..T] (planar standard normals).
/// Parameter-free: no model parameters enter.
[[nodiscard]] DifferenceProcess gamma_lw_from_noise(std::span<const Vec2> z, int h);
[[nodiscard]] DifferenceProcess gamma_rw_from_noise(std::span<const Vec2> z, int h);

/// Draws Z_0..Z_T from rng and builds the null process.
[[nodiscard]] DifferenceProcess gamma_null_lw(std::int64_t T, int h, SeededRng& rng);
[[nodiscard]] DifferenceProcess gamma_null_rw(std::int64_t T, int h, SeededRng& rng);

struct NullSimConfig {
  std::int64_t T = 0;
  std::vector<int> windows;
  int sims = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

/// Throws ValidationError unless min(H) >= 3, 2 max(H) < T, S >= 1 and
/// alpha in (0, 1).
void validate(const NullSimConfig& config);

struct ThresholdResult {
  double q = 0.0;
  std::vector<double> maxima;  // one per simulation, in simulation order
  bool ill_resolved = false;   // S * alpha < 1
};

/// Simulation s draws its noise from SeededRng(seed, kThresholdStreamBase + s)
/// so threshold noise never coincides with simulate()'s per-track streams.
inline constexpr std::uint64_t kThresholdStreamBase = 1ULL << 40;

/// Rejection radius Q: the empirical (1 - alpha) quantile of
/// max_{h in H, i} |Gamma_{h,i}| over S simulations, all windows of one
/// simulation sharing the same noise. Simulations run in parallel.
[[nodiscard]] ThresholdResult threshold(const NullSimConfig& config, ModelKind kind);

/// Order statistic at rank ceil((1 - alpha) S), 1-based.
[[nodiscard]] double empirical_quantile(std::span<const double> maxima, double alpha);

/// Normalized autocovariance of the limit process of Gamma^LW.
[[nodiscard]] double kappa(double x);

namespace reference {

// Serial, straightforward kernels kept for cross-checking the parallel ones.
[[nodiscard]] DifferenceProcess g_process_lw_serial(const Track& track, int h,
                                                    std::optional<double> known_sigma2 = std::nullopt);
[[nodiscard]] DifferenceProcess g_process_rw_serial(const Track& track, int h,
                                                    std::optional<double> known_sigma2 = std::nullopt);
/// Direct weighted sums, O(h) per center.
[[nodiscard]] DifferenceProcess gamma_lw_direct(std::span<const Vec2> z, int h);
[[nodiscard]] DifferenceProcess gamma_rw_direct(std::span<const Vec2> z, int h);
[[nodiscard]] ThresholdResult threshold_serial(const NullSimConfig& config, ModelKind kind);

}  // namespace reference

}  // namespace linwalk
