#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "linwalk/types.hpp"

namespace linwalk {

/// Deterministic standard-normal source keyed by (master_seed, stream_id).
/// Distinct stream ids give statistically independent streams.
class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t master_seed() const { return master_seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  double normal();
  Vec2 normal2();
  /// Planar standard normals Z_0 .. Z_{count-1}, drawn x then y per index.
  std::vector<Vec2> normal_field(std::size_t count);
  double uniform();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace linwalk
