#include "linwalk/leaf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "linwalk/estimate.hpp"
#include "linwalk/io.hpp"
#include "linwalk/statistic.hpp"

namespace linwalk {
namespace {

constexpr double kClassFactor = 3.0;

double median_abs(std::vector<double> values) {
  for (auto& v : values) v = std::abs(v);
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(values.begin(), mid));
}

double standardized(double d, double se) {
  if (se > 0.0 && std::isfinite(se)) return d / se;
  if (std::isinf(se)) return 0.0;
  return d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
}

double relative(double z, double scale) {
  if (scale > 0.0) return std::abs(z) / scale;
  return z == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string_view marker_color(CpClass c) {
  switch (c) {
    case CpClass::direction:
      return "#1f77b4";
    case CpClass::step_length:
      return "#ff7f0e";
    case CpClass::both:
      return "#2ca02c";
    case CpClass::unclassified:
      break;
  }
  return "#d62728";
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

double direction_difference(double theta_left, double theta_right) {
  const double d = theta_right - theta_left;
  double wrapped = std::atan2(std::sin(d), std::cos(d));
  if (wrapped == -std::numbers::pi) wrapped = std::numbers::pi;
  return wrapped;
}

LeafSeries leaf_series(const Track& track, int h, ModelKind kind, std::span<const std::int64_t> detected) {
  // The difference process validates the window and exposes the center range.
  const CenterRange range = center_range(kind, track.first_t, track.size(), h);
  if (h < (kind == ModelKind::lw ? 3 : 2) || range.last < range.first) {
    throw ValidationError("leaf_series: track '" + track.id + "' too short for window h=" + std::to_string(h));
  }
  const std::vector<Vec2> incs = kind == ModelKind::rw ? increments(track) : std::vector<Vec2>{};
  const std::span<const Vec2> data = kind == ModelKind::lw ? std::span<const Vec2>(track.positions)
                                                           : std::span<const Vec2>(incs);
  const std::int64_t data_first_t = kind == ModelKind::lw ? track.first_t : track.first_t + 1;
  const double hd = h;
  const double factor = kind == ModelKind::lw ? 12.0 / (hd * hd * hd - hd) : 1.0 / hd;

  auto fit = [&](std::int64_t first_stamp) {
    const auto offset = static_cast<std::size_t>(first_stamp - data_first_t);
    const auto window = data.subspan(offset, static_cast<std::size_t>(h));
    return kind == ModelKind::lw ? lw_fit(window, first_stamp - 1) : rw_fit(window, first_stamp - 1);
  };

  LeafSeries s;
  s.h = h;
  s.kind = kind;
  const auto count = static_cast<std::size_t>(range.last - range.first + 1);
  s.centers.resize(count);
  s.d_theta.resize(count);
  s.d_r.resize(count);
  s.se_theta.resize(count);
  s.se_r.resize(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(count); ++k) {
    const std::int64_t c = range.first + k;
    const WindowEstimate left = fit(c - h + 1);
    const WindowEstimate right = fit(c + 1);
    const auto idx = static_cast<std::size_t>(k);
    const double var_l = factor * left.sigma2;
    const double var_r = factor * right.sigma2;
    s.centers[idx] = c;
    s.d_theta[idx] = direction_difference(left.theta, right.theta);
    s.d_r[idx] = right.r - left.r;
    s.se_r[idx] = std::sqrt(var_l + var_r);
    const double inf = std::numeric_limits<double>::infinity();
    const double ang_l = left.r > 0.0 ? var_l / (left.r * left.r) : inf;
    const double ang_r = right.r > 0.0 ? var_r / (right.r * right.r) : inf;
    s.se_theta[idx] = std::sqrt(ang_l + ang_r);
  }
  for (const auto cp : detected) {
    if (cp >= range.first && cp <= range.last) s.markers.push_back({cp, CpClass::unclassified});
  }
  return s;
}

CpClass classify(const LeafSeries& series, std::int64_t cp) {
  if (series.centers.empty() || cp < series.centers.front() || cp > series.centers.back()) {
    throw std::out_of_range("classify: change point " + std::to_string(cp) + " outside the series");
  }
  const std::int64_t exclusion = 2 * static_cast<std::int64_t>(series.h);
  std::vector<double> z_theta, z_r;
  for (std::size_t k = 0; k < series.centers.size(); ++k) {
    const std::int64_t c = series.centers[k];
    const bool near = std::abs(c - cp) <= exclusion ||
                      std::any_of(series.markers.begin(), series.markers.end(),
                                  [&](const LeafMarker& m) { return std::abs(c - m.index) <= exclusion; });
    if (near) continue;
    z_theta.push_back(standardized(series.d_theta[k], series.se_theta[k]));
    z_r.push_back(standardized(series.d_r[k], series.se_r[k]));
  }
  if (z_theta.empty()) {
    for (std::size_t k = 0; k < series.centers.size(); ++k) {
      z_theta.push_back(standardized(series.d_theta[k], series.se_theta[k]));
      z_r.push_back(standardized(series.d_r[k], series.se_r[k]));
    }
  }
  const double tau_theta = median_abs(std::move(z_theta));
  const double tau_r = median_abs(std::move(z_r));

  const auto k = static_cast<std::size_t>(cp - series.centers.front());
  const double rel_theta = relative(standardized(series.d_theta[k], series.se_theta[k]), tau_theta);
  const double rel_r = relative(standardized(series.d_r[k], series.se_r[k]), tau_r);
  const bool dir = rel_theta > kClassFactor;
  const bool len = rel_r > kClassFactor;
  if (dir && len) return CpClass::both;
  if (dir) return CpClass::direction;
  if (len) return CpClass::step_length;
  return rel_r > rel_theta ? CpClass::step_length : CpClass::direction;
}

std::string leaf_svg(const LeafSeries& series, const std::string& title) {
  constexpr double width = 640.0, height = 480.0, margin = 60.0;
  double r_extent = 0.0;
  for (const double v : series.d_r) r_extent = std::max(r_extent, std::abs(v));
  r_extent = r_extent > 0.0 ? 1.1 * r_extent : 1.0;
  constexpr double theta_extent = std::numbers::pi;
  const double plot_w = width - 2.0 * margin;
  const double plot_h = height - 2.0 * margin;
  auto px = [&](double d_r) { return margin + (d_r + r_extent) / (2.0 * r_extent) * plot_w; };
  auto py = [&](double d_theta) { return margin + (theta_extent - d_theta) / (2.0 * theta_extent) * plot_h; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<title>" << escape_xml(title) << " (h=" << series.h << ")</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
      << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << margin << "\" y1=\"" << fixed(py(0.0)) << "\" x2=\"" << width - margin << "\" y2=\""
      << fixed(py(0.0)) << "\"/>\n"
      << "<line x1=\"" << fixed(px(0.0)) << "\" y1=\"" << margin << "\" x2=\"" << fixed(px(0.0)) << "\" y2=\""
      << height - margin << "\"/>\n"
      << "</g>\n"
      << "<g class=\"labels\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<text x=\"" << width / 2.0 << "\" y=\"" << height - 15.0
      << "\" text-anchor=\"middle\">step-length difference d_r (length/step)</text>\n"
      << "<text x=\"15\" y=\"" << height / 2.0 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << height / 2.0 << ")\">direction difference d_theta (rad)</text>\n"
      << "<text x=\"" << fixed(px(0.0) + 4.0) << "\" y=\"" << fixed(py(theta_extent) + 12.0) << "\">pi</text>\n"
      << "<text x=\"" << fixed(px(0.0) + 4.0) << "\" y=\"" << fixed(py(-theta_extent) - 4.0) << "\">-pi</text>\n"
      << "<text x=\"" << fixed(px(-r_extent)) << "\" y=\"" << fixed(py(0.0) + 14.0) << "\">"
      << format_double(-r_extent, 3) << "</text>\n"
      << "<text x=\"" << fixed(px(r_extent)) << "\" y=\"" << fixed(py(0.0) + 14.0)
      << "\" text-anchor=\"end\">" << format_double(r_extent, 3) << "</text>\n"
      << "</g>\n";
  if (!series.centers.empty()) {
    out << "<polyline class=\"leaf\" fill=\"none\" stroke=\"#555555\" stroke-width=\"1\" points=\"";
    for (std::size_t k = 0; k < series.centers.size(); ++k) {
      out << (k ? " " : "") << fixed(px(series.d_r[k])) << ',' << fixed(py(series.d_theta[k]));
    }
    out << "\"/>\n";
  }
  for (const auto& m : series.markers) {
    if (series.centers.empty() || m.index < series.centers.front() || m.index > series.centers.back()) continue;
    const auto k = static_cast<std::size_t>(m.index - series.centers.front());
    out << "<circle class=\"marker " << to_string(m.cls) << "\" cx=\"" << fixed(px(series.d_r[k])) << "\" cy=\""
        << fixed(py(series.d_theta[k])) << "\" r=\"5\" fill=\"" << marker_color(m.cls) << "\"><title>i="
        << m.index << " " << to_string(m.cls) << "</title></circle>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void render_svg(const LeafSeries& series, const std::filesystem::path& path, const std::string& title) {
  write_text_file(path, leaf_svg(series, title));
}

std::string leaf_csv(const LeafSeries& series) {
  std::string out = "# format_version: 1\ni,d_r,d_theta\n";
  for (std::size_t k = 0; k < series.centers.size(); ++k) {
    out += std::to_string(series.centers[k]);
    out += ',';
    out += format_double(series.d_r[k]);
    out += ',';
    out += format_double(series.d_theta[k]);
    out += '\n';
  }
  return out;
}

void write_leaf_csv(const LeafSeries& series, const std::filesystem::path& path) {
  write_text_file(path, leaf_csv(series));
}

}  // namespace linwalk
