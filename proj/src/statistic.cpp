#include "linwalk/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "linwalk/estimate.hpp"

namespace linwalk {
namespace {

struct WindowStats {
  Vec2 mu;
  double sigma2 = 0.0;
};

// Data the windows slide over: positions for LW, increments for RW.
struct WindowData {
  std::vector<Vec2> storage;  // RW increments
  std::span<const Vec2> data;
  std::int64_t first_t = 0;  // time stamp of data[0]
};

WindowData window_data(const Track& track, ModelKind kind) {
  WindowData wd;
  if (kind == ModelKind::lw) {
    wd.data = track.positions;
    wd.first_t = track.first_t;
  } else {
    wd.storage = increments(track);
    wd.data = wd.storage;
    wd.first_t = track.first_t + 1;
  }
  return wd;
}

WindowStats fit_window(std::span<const Vec2> data, std::int64_t offset, int h, std::int64_t first_t,
                       ModelKind kind) {
  const auto window = data.subspan(static_cast<std::size_t>(offset), static_cast<std::size_t>(h));
  const std::int64_t i = first_t + offset - 1;
  const WindowEstimate est = kind == ModelKind::lw ? lw_fit(window, i) : rw_fit(window, i);
  return {est.mu, est.sigma2};
}

// Variance of each component of mu_hat per unit sigma^2.
double drift_variance_factor(int h, ModelKind kind) {
  const double hd = h;
  return kind == ModelKind::lw ? 12.0 / (hd * hd * hd - hd) : 1.0 / hd;
}

void check_window(const Track& track, int h, ModelKind kind) {
  const int min_h = kind == ModelKind::lw ? 3 : 2;
  if (h < min_h) {
    throw ValidationError("window h=" + std::to_string(h) + " below minimum " + std::to_string(min_h));
  }
  const CenterRange range = center_range(kind, track.first_t, track.size(), h);
  if (range.last < range.first) {
    throw ValidationError("track '" + track.id + "' of length " + std::to_string(track.size()) +
                          " is too short for window h=" + std::to_string(h) + " (needs " +
                          std::to_string(2 * h + 1) + ")");
  }
}

Vec2 scaled_difference(const WindowStats& left, const WindowStats& right, double factor,
                       std::optional<double> known_sigma2, bool& degenerate) {
  const double var_sum = known_sigma2 ? 2.0 * *known_sigma2 : left.sigma2 + right.sigma2;
  if (!(var_sum > 0.0)) {
    degenerate = true;
    return {};
  }
  return (right.mu - left.mu) * (1.0 / std::sqrt(factor * var_sum));
}

[[noreturn]] void throw_degenerate(const Track& track, std::int64_t center) {
  throw DegenerateTrackError("track '" + track.id + "': both window variance estimates vanish at i=" +
                                 std::to_string(center),
                             center);
}

DifferenceProcess g_process_parallel(const Track& track, int h, ModelKind kind,
                                     std::optional<double> known_sigma2) {
  check_window(track, h, kind);
  const WindowData wd = window_data(track, kind);
  const CenterRange range = center_range(kind, track.first_t, track.size(), h);
  const auto n_windows = static_cast<std::int64_t>(wd.data.size()) - h + 1;
  const double factor = drift_variance_factor(h, kind);

  std::vector<WindowStats> fits(static_cast<std::size_t>(n_windows));
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n_windows; ++s) {
    fits[static_cast<std::size_t>(s)] = fit_window(wd.data, s, h, wd.first_t, kind);
  }

  const std::int64_t count = range.last - range.first + 1;
  DifferenceProcess out;
  out.h = h;
  out.kind = kind;
  out.centers.resize(static_cast<std::size_t>(count));
  out.values.resize(static_cast<std::size_t>(count));
  std::vector<char> degenerate(static_cast<std::size_t>(count), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < count; ++k) {
    const std::int64_t c = range.first + k;
    const std::int64_t left = c - h + 1 - wd.first_t;
    const std::int64_t right = c + 1 - wd.first_t;
    bool bad = false;
    const auto idx = static_cast<std::size_t>(k);
    out.centers[idx] = c;
    out.values[idx] = scaled_difference(fits[static_cast<std::size_t>(left)],
                                        fits[static_cast<std::size_t>(right)], factor, known_sigma2, bad);
    degenerate[idx] = bad ? 1 : 0;
  }
  const auto it = std::find(degenerate.begin(), degenerate.end(), 1);
  if (it != degenerate.end()) throw_degenerate(track, range.first + (it - degenerate.begin()));
  return out;
}

DifferenceProcess g_process_serial(const Track& track, int h, ModelKind kind,
                                   std::optional<double> known_sigma2) {
  check_window(track, h, kind);
  const WindowData wd = window_data(track, kind);
  const CenterRange range = center_range(kind, track.first_t, track.size(), h);
  const double factor = drift_variance_factor(h, kind);
  DifferenceProcess out;
  out.h = h;
  out.kind = kind;
  for (std::int64_t c = range.first; c <= range.last; ++c) {
    const WindowStats left = fit_window(wd.data, c - h + 1 - wd.first_t, h, wd.first_t, kind);
    const WindowStats right = fit_window(wd.data, c + 1 - wd.first_t, h, wd.first_t, kind);
    bool bad = false;
    const Vec2 g = scaled_difference(left, right, factor, known_sigma2, bad);
    if (bad) throw_degenerate(track, c);
    out.centers.push_back(c);
    out.values.push_back(g);
  }
  return out;
}

std::int64_t noise_horizon(std::span<const Vec2> z) {
  if (z.empty()) throw ValidationError("null process: empty noise array");
  return static_cast<std::int64_t>(z.size()) - 1;
}

void check_null_window(std::int64_t T, int h, ModelKind kind) {
  const int min_h = kind == ModelKind::lw ? 2 : 1;
  if (h < min_h) throw ValidationError("null process: window h=" + std::to_string(h) + " too small");
  const CenterRange range = center_range(kind, 1, T, h);
  if (range.last < range.first) {
    throw ValidationError("null process: T=" + std::to_string(T) + " too short for h=" + std::to_string(h));
  }
}

double lw_null_scale(int h) {
  const double hd = h;
  return 1.0 / std::sqrt(2.0 * (hd * hd * hd - hd) / 3.0);
}

// Sliding sums over z[i+1..i+h] for every i in [0, T-h]: plain sums (RW) or
// (2j-h-1)-weighted sums (LW), from exclusive prefix sums of z_m and m z_m.
std::vector<Vec2> window_sums(std::span<const Vec2> z, int h, bool weighted) {
  const auto n = static_cast<std::int64_t>(z.size());
  std::vector<Vec2> p0(z.size() + 1), p1(z.size() + 1);
  for (std::int64_t m = 0; m < n; ++m) {
    const auto idx = static_cast<std::size_t>(m);
    p0[idx + 1] = p0[idx] + z[idx];
    p1[idx + 1] = p1[idx] + z[idx] * static_cast<double>(m);
  }
  const std::int64_t T = n - 1;
  std::vector<Vec2> out(static_cast<std::size_t>(T - h + 1));
  for (std::int64_t i = 0; i + h <= T; ++i) {
    const auto lo = static_cast<std::size_t>(i + 1);
    const auto hi = static_cast<std::size_t>(i + h + 1);
    const Vec2 a0 = p0[hi] - p0[lo];
    if (!weighted) {
      out[static_cast<std::size_t>(i)] = a0;
      continue;
    }
    const Vec2 a1 = p1[hi] - p1[lo];
    // sum_j j z_{i+j} = a1 - i a0; weight 2j - h - 1.
    out[static_cast<std::size_t>(i)] = (a1 - a0 * static_cast<double>(i)) * 2.0 - a0 * static_cast<double>(h + 1);
  }
  return out;
}

DifferenceProcess gamma_from_sums(std::span<const Vec2> z, int h, ModelKind kind) {
  const std::int64_t T = noise_horizon(z);
  check_null_window(T, h, kind);
  const bool weighted = kind == ModelKind::lw;
  const auto sums = window_sums(z, h, weighted);
  const double scale = weighted ? lw_null_scale(h) : 1.0 / std::sqrt(2.0 * h);
  const CenterRange range = center_range(kind, 1, T, h);
  DifferenceProcess out;
  out.h = h;
  out.kind = kind;
  for (std::int64_t i = range.first; i <= range.last; ++i) {
    out.centers.push_back(i);
    out.values.push_back((sums[static_cast<std::size_t>(i)] - sums[static_cast<std::size_t>(i - h)]) * scale);
  }
  return out;
}

DifferenceProcess gamma_direct(std::span<const Vec2> z, int h, ModelKind kind) {
  const std::int64_t T = noise_horizon(z);
  check_null_window(T, h, kind);
  const CenterRange range = center_range(kind, 1, T, h);
  const bool weighted = kind == ModelKind::lw;
  const double scale = weighted ? lw_null_scale(h) : 1.0 / std::sqrt(2.0 * h);
  DifferenceProcess out;
  out.h = h;
  out.kind = kind;
  for (std::int64_t i = range.first; i <= range.last; ++i) {
    Vec2 acc{};
    for (std::int64_t j = 1; j <= h; ++j) {
      const double w = weighted ? static_cast<double>(mu_weight(h, j)) : 1.0;
      acc += (z[static_cast<std::size_t>(i + j)] - z[static_cast<std::size_t>(i - h + j)]) * w;
    }
    out.centers.push_back(i);
    out.values.push_back(acc * scale);
  }
  return out;
}

double simulated_maximum(const NullSimConfig& config, ModelKind kind, std::int64_t sim, bool direct) {
  SeededRng rng(config.seed, kThresholdStreamBase + static_cast<std::uint64_t>(sim));
  const auto z = rng.normal_field(static_cast<std::size_t>(config.T) + 1);
  double best = 0.0;
  for (const int h : config.windows) {
    const DifferenceProcess g = direct ? gamma_direct(z, h, kind) : gamma_from_sums(z, h, kind);
    best = std::max(best, g.max_norm());
  }
  return best;
}

ThresholdResult finish_threshold(const NullSimConfig& config, std::vector<double> maxima) {
  ThresholdResult result;
  result.q = empirical_quantile(maxima, config.alpha);
  result.maxima = std::move(maxima);
  result.ill_resolved = static_cast<double>(config.sims) * config.alpha < 1.0;
  return result;
}

}  // namespace

double DifferenceProcess::max_norm() const {
  double best = 0.0;
  for (const auto& v : values) best = std::max(best, v.norm());
  return best;
}

CenterRange center_range(ModelKind kind, std::int64_t first_t, std::int64_t n, int h) {
  const std::int64_t last_t = first_t + n - 1;
  const std::int64_t first = kind == ModelKind::lw ? first_t + h - 1 : first_t + h;
  return {first, last_t - h};
}

DifferenceProcess g_process_lw(const Track& track, int h, std::optional<double> known_sigma2) {
  return g_process_parallel(track, h, ModelKind::lw, known_sigma2);
}

DifferenceProcess g_process_rw(const Track& track, int h, std::optional<double> known_sigma2) {
  return g_process_parallel(track, h, ModelKind::rw, known_sigma2);
}

DifferenceProcess g_process(const Track& track, int h, ModelKind kind) {
  return g_process_parallel(track, h, kind, std::nullopt);
}

DifferenceProcess gamma_lw_from_noise(std::span<const Vec2> z, int h) {
  return gamma_from_sums(z, h, ModelKind::lw);
}

DifferenceProcess gamma_rw_from_noise(std::span<const Vec2> z, int h) {
  return gamma_from_sums(z, h, ModelKind::rw);
}

DifferenceProcess gamma_null_lw(std::int64_t T, int h, SeededRng& rng) {
  if (T < 1) throw ValidationError("null process: T must be >= 1");
  const auto z = rng.normal_field(static_cast<std::size_t>(T) + 1);
  return gamma_lw_from_noise(z, h);
}

DifferenceProcess gamma_null_rw(std::int64_t T, int h, SeededRng& rng) {
  if (T < 1) throw ValidationError("null process: T must be >= 1");
  const auto z = rng.normal_field(static_cast<std::size_t>(T) + 1);
  return gamma_rw_from_noise(z, h);
}

void validate(const NullSimConfig& config) {
  if (config.windows.empty()) throw ValidationError("threshold: window set is empty");
  const int min_h = *std::min_element(config.windows.begin(), config.windows.end());
  const int max_h = *std::max_element(config.windows.begin(), config.windows.end());
  if (min_h < 3) throw ValidationError("threshold: windows must be >= 3");
  if (2 * static_cast<std::int64_t>(max_h) >= config.T) {
    throw ValidationError("threshold: 2*max(H)=" + std::to_string(2 * max_h) +
                          " must be below T=" + std::to_string(config.T));
  }
  if (config.sims < 1) throw ValidationError("threshold: sims must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ValidationError("threshold: alpha must lie in (0, 1)");
  }
}

ThresholdResult threshold(const NullSimConfig& config, ModelKind kind) {
  validate(config);
  std::vector<double> maxima(static_cast<std::size_t>(config.sims));
  const std::int64_t sims = config.sims;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t s = 0; s < sims; ++s) {
    maxima[static_cast<std::size_t>(s)] = simulated_maximum(config, kind, s, false);
  }
  return finish_threshold(config, std::move(maxima));
}

double empirical_quantile(std::span<const double> maxima, double alpha) {
  if (maxima.empty()) throw ValidationError("empirical_quantile: no samples");
  std::vector<double> sorted(maxima.begin(), maxima.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // Guard against (1 - alpha) S landing a hair above an integer.
  auto rank = static_cast<std::int64_t>(std::ceil((1.0 - alpha) * n - 1e-9));
  rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

double kappa(double x) {
  if (!(x >= 0.0)) throw std::domain_error("kappa: argument must be >= 0");
  if (x <= 1.0) return 3.0 * x * x * x - 3.0 * x * x - 1.5 * x + 1.0;
  if (x <= 2.0) return -x * x * x + 3.0 * x * x - 1.5 * x - 1.0;
  return 0.0;
}

namespace reference {

DifferenceProcess g_process_lw_serial(const Track& track, int h, std::optional<double> known_sigma2) {
  return g_process_serial(track, h, ModelKind::lw, known_sigma2);
}

DifferenceProcess g_process_rw_serial(const Track& track, int h, std::optional<double> known_sigma2) {
  return g_process_serial(track, h, ModelKind::rw, known_sigma2);
}

DifferenceProcess gamma_lw_direct(std::span<const Vec2> z, int h) {
  return gamma_direct(z, h, ModelKind::lw);
}

DifferenceProcess gamma_rw_direct(std::span<const Vec2> z, int h) {
  return gamma_direct(z, h, ModelKind::rw);
}

ThresholdResult threshold_serial(const NullSimConfig& config, ModelKind kind) {
  validate(config);
  std::vector<double> maxima;
  maxima.reserve(static_cast<std::size_t>(config.sims));
  for (std::int64_t s = 0; s < config.sims; ++s) {
    maxima.push_back(simulated_maximum(config, kind, s, true));
  }
  return finish_threshold(config, std::move(maxima));
}

}  // namespace reference

}  // namespace linwalk
