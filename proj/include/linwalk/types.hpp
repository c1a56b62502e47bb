#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace linwalk {

/// Planar vector used for positions, increments and drifts.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

  [[nodiscard]] constexpr double squared_norm() const { return x * x + y * y; }
  [[nodiscard]] double norm() const { return std::hypot(x, y); }
};

enum class ModelKind { lw, rw };

[[nodiscard]] std::string_view to_string(ModelKind kind);
/// Parses "lw" / "rw"; throws ValidationError otherwise.
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);

/// Time-indexed planar track with consecutive integer time stamps
/// first_t, first_t + 1, ...
struct Track {
  std::string id;
  std::int64_t first_t = 1;
  std::vector<Vec2> positions;

  [[nodiscard]] std::int64_t size() const {
    return static_cast<std::int64_t>(positions.size());
  }
  [[nodiscard]] std::int64_t last_t() const { return first_t + size() - 1; }
  /// Position at time stamp t.
  [[nodiscard]] const Vec2& at(std::int64_t t) const {
    return positions[static_cast<std::size_t>(t - first_t)];
  }
};

/// Checks the Track invariants (non-empty, finite coordinates).
void validate(const Track& track);

/// Increments Y_t = X_t - X_{t-1} for t = first_t + 1 .. last_t.
[[nodiscard]] std::vector<Vec2> increments(const Track& track);

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a variance estimate vanishes and the scaled statistic is
/// undefined.
class DegenerateTrackError : public std::runtime_error {
 public:
  DegenerateTrackError(const std::string& what, std::int64_t index)
      : std::runtime_error(what), index_(index) {}
  [[nodiscard]] std::int64_t index() const { return index_; }

 private:
  std::int64_t index_;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace linwalk
