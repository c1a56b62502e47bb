#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "linwalk/model.hpp"
#include "linwalk/rng.hpp"
#include "linwalk/types.hpp"

namespace testing {

inline double deg(double d) { return d / 180.0 * std::numbers::pi; }

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double standard_error(const std::vector<double>& v) {
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double autocorrelation(const std::vector<double>& v, std::size_t lag) {
  std::vector<double> a(v.begin(), v.end() - static_cast<std::ptrdiff_t>(lag));
  std::vector<double> b(v.begin() + static_cast<std::ptrdiff_t>(lag), v.end());
  return correlation(a, b);
}

// Textbook least squares of y against t: returns {slope, intercept}.
struct Line {
  double slope;
  double intercept;
};

inline Line ols(const std::vector<double>& t, const std::vector<double>& y) {
  const double mt = mean(t), my = mean(y);
  double stt = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    sty += (t[k] - mt) * (y[k] - my);
  }
  const double slope = sty / stt;
  return {slope, my - slope * mt};
}

inline linwalk::Track track_from(std::vector<linwalk::Vec2> positions, std::int64_t first_t = 1) {
  linwalk::Track t;
  t.id = "t";
  t.first_t = first_t;
  t.positions = std::move(positions);
  return t;
}

inline linwalk::ModelSpec lw_spec(std::vector<double> thetas_deg, std::vector<double> r, double sigma,
                                  std::vector<std::int64_t> cps, std::int64_t T,
                                  linwalk::ModelKind kind = linwalk::ModelKind::lw) {
  linwalk::ModelSpec s;
  s.kind = kind;
  for (const double d : thetas_deg) s.thetas.push_back(deg(d));
  s.step_lengths = std::move(r);
  s.sigma2 = sigma * sigma;
  s.change_points = std::move(cps);
  s.horizon = T;
  return s;
}

inline linwalk::Track simulate_seeded(const linwalk::ModelSpec& spec, std::uint64_t seed,
                                      std::uint64_t stream = 0) {
  linwalk::SeededRng rng(seed, stream);
  return linwalk::simulate(spec, rng);
}

}  // namespace testing
