#include "linwalk/types.hpp"

namespace linwalk {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::lw ? "lw" : "rw";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "lw" || text == "LW") return ModelKind::lw;
  if (text == "rw" || text == "RW") return ModelKind::rw;
  throw ValidationError("unknown model '" + std::string(text) + "' (expected lw or rw)");
}

void validate(const Track& track) {
  if (track.positions.empty()) {
    throw ValidationError("track '" + track.id + "' is empty");
  }
  for (std::size_t k = 0; k < track.positions.size(); ++k) {
    const Vec2& p = track.positions[k];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("track '" + track.id + "' has a non-finite coordinate at t=" +
                            std::to_string(track.first_t + static_cast<std::int64_t>(k)));
    }
  }
}

std::vector<Vec2> increments(const Track& track) {
  std::vector<Vec2> out;
  if (track.positions.size() < 2) return out;
  out.reserve(track.positions.size() - 1);
  for (std::size_t k = 1; k < track.positions.size(); ++k) {
    out.push_back(track.positions[k] - track.positions[k - 1]);
  }
  return out;
}

}  // namespace linwalk
