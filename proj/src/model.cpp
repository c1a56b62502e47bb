#include "linwalk/model.hpp"

#include <cmath>
#include <string>

namespace linwalk {

void validate(const ModelSpec& spec) {
  const std::size_t segments = spec.change_points.size() + 1;
  if (spec.thetas.size() != segments || spec.step_lengths.size() != segments) {
    throw ValidationError("model spec: " + std::to_string(spec.change_points.size()) +
                          " change points need " + std::to_string(segments) +
                          " directions and step lengths, got " +
                          std::to_string(spec.thetas.size()) + " and " +
                          std::to_string(spec.step_lengths.size()));
  }
  if (spec.horizon < 1) throw ValidationError("model spec: horizon must be >= 1");
  if (!(spec.sigma2 > 0.0) || !std::isfinite(spec.sigma2)) {
    throw ValidationError("model spec: sigma2 must be finite and > 0");
  }
  if (!std::isfinite(spec.b1.x) || !std::isfinite(spec.b1.y)) {
    throw ValidationError("model spec: b1 must be finite");
  }
  for (std::size_t j = 0; j < segments; ++j) {
    if (!std::isfinite(spec.thetas[j])) throw ValidationError("model spec: non-finite direction");
    if (!(spec.step_lengths[j] > 0.0) || !std::isfinite(spec.step_lengths[j])) {
      throw ValidationError("model spec: step lengths must be finite and > 0");
    }
  }
  std::int64_t prev = 0;
  for (const auto c : spec.change_points) {
    if (c <= prev) throw ValidationError("model spec: change points must be strictly increasing and >= 1");
    if (c >= spec.horizon) throw ValidationError("model spec: change point " + std::to_string(c) + " not below horizon");
    prev = c;
  }
  for (std::size_t j = 1; j < segments; ++j) {
    if (spec.thetas[j] == spec.thetas[j - 1] && spec.step_lengths[j] == spec.step_lengths[j - 1]) {
      throw ValidationError("model spec: segments " + std::to_string(j) + " and " +
                            std::to_string(j + 1) + " share direction and step length");
    }
  }
}

std::vector<Vec2> segment_drifts(const ModelSpec& spec) {
  std::vector<Vec2> mu(spec.thetas.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    mu[j] = Vec2{std::cos(spec.thetas[j]), std::sin(spec.thetas[j])} * spec.step_lengths[j];
  }
  return mu;
}

std::vector<Vec2> segment_offsets(const ModelSpec& spec) {
  const auto mu = segment_drifts(spec);
  std::vector<Vec2> b(mu.size());
  if (b.empty()) return b;
  b[0] = spec.b1;
  // b_j = (c_{j-1} - c_{j-2}) mu_{j-1} + b_{j-1}, with c_0 = 0 (1-based j).
  for (std::size_t j = 1; j < b.size(); ++j) {
    const std::int64_t hi = spec.change_points[j - 1];
    const std::int64_t lo = j >= 2 ? spec.change_points[j - 2] : 0;
    b[j] = b[j - 1] + mu[j - 1] * static_cast<double>(hi - lo);
  }
  return b;
}

Track expected_process(const ModelSpec& spec) {
  validate(spec);
  const auto mu = segment_drifts(spec);
  const auto b = segment_offsets(spec);
  Track out{"expected", 1, {}};
  out.positions.reserve(static_cast<std::size_t>(spec.horizon));
  std::size_t seg = 0;
  std::int64_t seg_start = 0;  // c_{j-1}
  for (std::int64_t i = 1; i <= spec.horizon; ++i) {
    if (seg < spec.change_points.size() && i > spec.change_points[seg]) {
      seg_start = spec.change_points[seg];
      ++seg;
    }
    out.positions.push_back(b[seg] + mu[seg] * static_cast<double>(i - seg_start));
  }
  return out;
}

Track simulate(const ModelSpec& spec, SeededRng& rng, std::string id) {
  Track track = expected_process(spec);
  track.id = std::move(id);
  const double sigma = std::sqrt(spec.sigma2);
  const auto z = rng.normal_field(static_cast<std::size_t>(spec.horizon) + 1);
  if (spec.kind == ModelKind::lw) {
    for (std::size_t i = 1; i < z.size(); ++i) track.positions[i - 1] += sigma * z[i];
  } else {
    Vec2 walk{};
    for (std::size_t i = 1; i < z.size(); ++i) {
      walk += z[i];
      track.positions[i - 1] += sigma * walk;
    }
  }
  return track;
}

}  // namespace linwalk
