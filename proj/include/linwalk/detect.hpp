#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "linwalk/statistic.hpp"
#include "linwalk/types.hpp"

namespace linwalk {

enum class Verdict { retain, reject };
enum class CpClass { unclassified, direction, step_length, both };

[[nodiscard]] std::string_view to_string(Verdict v);
[[nodiscard]] std::string_view to_string(CpClass c);
[[nodiscard]] CpClass parse_cp_class(std::string_view text);

struct ChangePoint {
  std::int64_t index = 0;  // last time stamp of the left regime
  int window = 0;          // window that produced the estimate
  CpClass cls = CpClass::unclassified;

  friend bool operator==(const ChangePoint&, const ChangePoint&) = default;
};

struct TestResult {
  double m = 0.0;
  double q = 0.0;
  Verdict verdict = Verdict::retain;
};

struct DetectionReport {
  Verdict verdict = Verdict::retain;
  double m = 0.0;
  double q = 0.0;
  double alpha = 0.0;
  std::vector<int> windows;                  // ascending
  std::vector<ChangePoint> change_points;    // ascending by index
  std::vector<DifferenceProcess> processes;  // one per window, same order
};

struct DetectOptions {
  /// Reuse a previously simulated rejection radius instead of simulating.
  std::optional<double> threshold;
  /// Fill CP classes from leaf series of each CP's source window.
  bool classify = false;
};

/// Null-simulation settings matched to a track's length.
[[nodiscard]] NullSimConfig null_config_for(const Track& track, std::vector<int> windows, int sims,
                                            double alpha, std::uint64_t seed);

/// M = max over windows and centers of |G|, compared strictly against Q.
/// config.T must equal the track length.
[[nodiscard]] TestResult test(const Track& track, const NullSimConfig& config, ModelKind kind,
                              std::optional<double> precomputed_q = std::nullopt);

/// Iterated argmax with deletion of [c-h+1, c+h]; ties go to the lower
/// index. Returns change points in detection order.
[[nodiscard]] std::vector<std::int64_t> detect_single_window(const DifferenceProcess& g, double q);

/// Merges per-window estimates, smallest window first. All estimates of the
/// smallest window are accepted; an estimate c from a larger window h_j is
/// accepted iff no change point accepted from a smaller window lies in
/// [c - h_j + 1, c + h_j].
[[nodiscard]] std::vector<ChangePoint> merge_windows(
    const std::vector<std::pair<int, std::vector<std::int64_t>>>& per_window);

[[nodiscard]] DetectionReport detect_multi_window(const Track& track, const NullSimConfig& config,
                                                  ModelKind kind, const DetectOptions& options = {});

}  // namespace linwalk
