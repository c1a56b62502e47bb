#include "linwalk/rng.hpp"

namespace linwalk {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(master);
  const std::uint64_t b = splitmix64(stream ^ 0x6a09e667f3bcc909ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

SeededRng::SeededRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      engine_(make_engine(master_seed, stream_id)) {}

double SeededRng::normal() { return normal_(engine_); }

Vec2 SeededRng::normal2() {
  const double x = normal_(engine_);
  const double y = normal_(engine_);
  return {x, y};
}

std::vector<Vec2> SeededRng::normal_field(std::size_t count) {
  std::vector<Vec2> out(count);
  for (auto& z : out) z = normal2();
  return out;
}

double SeededRng::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

}  // namespace linwalk
