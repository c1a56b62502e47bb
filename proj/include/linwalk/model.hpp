#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linwalk/rng.hpp"
#include "linwalk/types.hpp"

namespace linwalk {

/// Piecewise parameters of an expected process together with the noise
/// model. Segment j (0-based) covers model indices (c_{j-1}, c_j] with
/// c_{-1} = 0 and c_k = horizon.
struct ModelSpec {
  ModelKind kind = ModelKind::lw;
  std::vector<double> thetas;        // radians
  std::vector<double> step_lengths;  // distance per step
  Vec2 b1{};
  double sigma2 = 1.0;
  std::vector<std::int64_t> change_points;
  std::int64_t horizon = 0;
};

/// Throws ValidationError if any ModelSpec invariant is violated.
void validate(const ModelSpec& spec);

/// Drift r_j (cos theta_j, sin theta_j) of each segment.
[[nodiscard]] std::vector<Vec2> segment_drifts(const ModelSpec& spec);

/// Offsets b_j chaining the segments end to end.
[[nodiscard]] std::vector<Vec2> segment_offsets(const ModelSpec& spec);

/// Noise-free piecewise linear path e_1 .. e_T.
[[nodiscard]] Track expected_process(const ModelSpec& spec);

/// One LW or RW realization. The rng supplies Z_0 .. Z_T; Z_0 is drawn but
/// not used by either model.
[[nodiscard]] Track simulate(const ModelSpec& spec, SeededRng& rng,
                             std::string id = "track_0");

}  // namespace linwalk
