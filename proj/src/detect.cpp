#include "linwalk/detect.hpp"

#include <algorithm>
#include <string>

#include "linwalk/leaf.hpp"

namespace linwalk {
namespace {

std::vector<int> sorted_windows(std::vector<int> windows) {
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
  return windows;
}

void check_config(const Track& track, const NullSimConfig& config) {
  validate(config);
  if (config.T != track.size()) {
    throw ValidationError("config T=" + std::to_string(config.T) + " does not match track '" + track.id +
                          "' of length " + std::to_string(track.size()));
  }
}

double resolve_threshold(const NullSimConfig& config, ModelKind kind, std::optional<double> q) {
  return q ? *q : threshold(config, kind).q;
}

}  // namespace

std::string_view to_string(Verdict v) { return v == Verdict::reject ? "reject" : "retain"; }

std::string_view to_string(CpClass c) {
  switch (c) {
    case CpClass::direction:
      return "direction";
    case CpClass::step_length:
      return "step_length";
    case CpClass::both:
      return "both";
    case CpClass::unclassified:
      break;
  }
  return "unclassified";
}

CpClass parse_cp_class(std::string_view text) {
  if (text == "direction") return CpClass::direction;
  if (text == "step_length") return CpClass::step_length;
  if (text == "both") return CpClass::both;
  if (text == "unclassified") return CpClass::unclassified;
  throw ValidationError("unknown change point class '" + std::string(text) + "'");
}

NullSimConfig null_config_for(const Track& track, std::vector<int> windows, int sims, double alpha,
                              std::uint64_t seed) {
  return NullSimConfig{track.size(), sorted_windows(std::move(windows)), sims, alpha, seed};
}

TestResult test(const Track& track, const NullSimConfig& config, ModelKind kind,
                std::optional<double> precomputed_q) {
  check_config(track, config);
  TestResult result;
  for (const int h : config.windows) {
    result.m = std::max(result.m, g_process(track, h, kind).max_norm());
  }
  result.q = resolve_threshold(config, kind, precomputed_q);
  result.verdict = result.m > result.q ? Verdict::reject : Verdict::retain;
  return result;
}

std::vector<std::int64_t> detect_single_window(const DifferenceProcess& g, double q) {
  std::vector<double> norms(g.values.size());
  for (std::size_t k = 0; k < norms.size(); ++k) norms[k] = g.values[k].norm();
  std::vector<char> deleted(norms.size(), 0);
  std::vector<std::int64_t> found;
  const std::int64_t first = g.centers.empty() ? 0 : g.centers.front();
  for (;;) {
    std::size_t best = norms.size();
    for (std::size_t k = 0; k < norms.size(); ++k) {
      if (deleted[k] || !(norms[k] > q)) continue;
      // Strict comparison keeps the lowest index among ties.
      if (best == norms.size() || norms[k] > norms[best]) best = k;
    }
    if (best == norms.size()) break;
    const std::int64_t c = g.centers[best];
    found.push_back(c);
    const std::int64_t lo = std::max<std::int64_t>(c - g.h + 1 - first, 0);
    const std::int64_t hi = std::min<std::int64_t>(c + g.h - first, static_cast<std::int64_t>(norms.size()) - 1);
    for (std::int64_t k = lo; k <= hi; ++k) deleted[static_cast<std::size_t>(k)] = 1;
  }
  return found;
}

std::vector<ChangePoint> merge_windows(const std::vector<std::pair<int, std::vector<std::int64_t>>>& per_window) {
  auto order = per_window;
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ChangePoint> accepted;
  for (std::size_t w = 0; w < order.size(); ++w) {
    const int h = order[w].first;
    const std::size_t previously_accepted = accepted.size();
    for (const auto c : order[w].second) {
      const bool blocked = std::any_of(accepted.begin(),
                                       accepted.begin() + static_cast<std::ptrdiff_t>(previously_accepted),
                                       [&](const ChangePoint& a) { return a.index > c - h && a.index <= c + h; });
      if (w == 0 || !blocked) accepted.push_back({c, h, CpClass::unclassified});
    }
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const ChangePoint& a, const ChangePoint& b) { return a.index < b.index; });
  return accepted;
}

DetectionReport detect_multi_window(const Track& track, const NullSimConfig& config, ModelKind kind,
                                    const DetectOptions& options) {
  check_config(track, config);
  DetectionReport report;
  report.alpha = config.alpha;
  report.windows = sorted_windows(config.windows);
  for (const int h : report.windows) {
    report.processes.push_back(g_process(track, h, kind));
    report.m = std::max(report.m, report.processes.back().max_norm());
  }
  report.q = resolve_threshold(config, kind, options.threshold);
  report.verdict = report.m > report.q ? Verdict::reject : Verdict::retain;
  if (report.verdict == Verdict::retain) return report;

  std::vector<std::pair<int, std::vector<std::int64_t>>> per_window;
  for (const auto& g : report.processes) per_window.emplace_back(g.h, detect_single_window(g, report.q));
  report.change_points = merge_windows(per_window);

  if (options.classify) {
    for (const int h : report.windows) {
      const bool used = std::any_of(report.change_points.begin(), report.change_points.end(),
                                    [h](const ChangePoint& cp) { return cp.window == h; });
      if (!used) continue;
      std::vector<std::int64_t> markers;
      for (const auto& cp : report.change_points) markers.push_back(cp.index);
      const LeafSeries series = leaf_series(track, h, kind, markers);
      for (auto& cp : report.change_points) {
        if (cp.window == h) cp.cls = classify(series, cp.index);
      }
    }
  }
  return report;
}

}  // namespace linwalk
