// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "linwalk/detect.hpp"
#include "linwalk/estimate.hpp"
#include "linwalk/io.hpp"
#include "linwalk/leaf.hpp"
#include "linwalk/statistic.hpp"
#include "support.hpp"
#include "xml_check.hpp"

using namespace linwalk;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Integer identities of the drift and offset weights.
Outcome weight_identities() {
  for (std::int64_t h = 3; h <= 200; ++h) {
    const std::int64_t n = h * h * h - h;
    for (const std::int64_t i : {0, 7, 100}) {
      std::int64_t s_mu = 0, s_mu_t = 0, s_mu2 = 0, s_b = 0, s_b_t = 0;
      for (std::int64_t j = 1; j <= h; ++j) {
        s_mu += mu_weight(h, j);
        s_mu_t += mu_weight(h, j) * (i + j);
        s_mu2 += mu_weight(h, j) * mu_weight(h, j);
        s_b += b_weight(h, i, j);
        s_b_t += b_weight(h, i, j) * (i + j);
      }
      if (s_mu != 0 || 6 * s_mu_t != n || 3 * s_mu2 != n || s_b != n || s_b_t != 0) {
        return {false, fmt("identity broken at h=%lld i=%lld", static_cast<long long>(h), static_cast<long long>(i))};
      }
    }
  }
  return {true, "h=3..200, i in {0,7,100}: all five sums exact"};
}

// 2. lw_fit against textbook least squares.
Outcome ols_oracle() {
  SeededRng rng(2002, 0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int h = 3 + static_cast<int>(rng.uniform() * 198);
    const auto i = static_cast<std::int64_t>(rng.uniform() * 500);
    const Vec2 mu{rng.normal(), rng.normal()}, b{5 * rng.normal(), 5 * rng.normal()};
    const double sigma = 0.05 + 2 * rng.uniform();
    std::vector<Vec2> x;
    std::vector<double> t, px, py;
    for (int j = 1; j <= h; ++j) {
      const double tt = static_cast<double>(i + j);
      x.push_back(b + tt * mu + sigma * rng.normal2());
      t.push_back(tt);
      px.push_back(x.back().x);
      py.push_back(x.back().y);
    }
    const auto e = lw_fit(x, i);
    const auto lx = testing::ols(t, px), ly = testing::ols(t, py);
    auto rel = [](double a, double w) { return std::abs(a - w) / std::max(1.0, std::abs(w)); };
    worst = std::max({worst, rel(e.mu.x, lx.slope), rel(e.mu.y, ly.slope), rel(e.b.x, lx.intercept),
                      rel(e.b.y, ly.intercept)});
  }
  return {worst < 1e-10, fmt("1000 windows, max relative error %.2e", worst)};
}

// 3. Monte Carlo unbiasedness of the LW estimators.
Outcome unbiasedness() {
  const int h = 30, reps = 20000;
  const Vec2 mu{0.3, 0.4}, b{1, -2};
  SeededRng rng(2003, 0);
  std::vector<double> mx, my, bx, by, s2;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<Vec2> x;
    for (int j = 1; j <= h; ++j) x.push_back(b + static_cast<double>(j) * mu + rng.normal2());
    const auto e = lw_fit(x, 0);
    mx.push_back(e.mu.x);
    my.push_back(e.mu.y);
    bx.push_back(e.b.x);
    by.push_back(e.b.y);
    s2.push_back(e.sigma2);
  }
  double worst_se = 0.0;
  auto z = [&](const std::vector<double>& v, double truth) {
    const double d = std::abs(testing::mean(v) - truth) / testing::standard_error(v);
    worst_se = std::max(worst_se, d);
    return d < 3.0;
  };
  const bool means = z(mx, mu.x) & z(my, mu.y) & z(bx, b.x) & z(by, b.y) & z(s2, 1.0);
  const double want = 12.0 / (h * h * h - h);
  const double vx = testing::variance(mx) / want - 1.0, vy = testing::variance(my) / want - 1.0;
  const bool vars = std::abs(vx) < 0.05 && std::abs(vy) < 0.05;
  return {means && vars, fmt("worst mean deviation %.2f SE; var(mu_hat)/theory - 1 = %+.3f, %+.3f", worst_se, vx, vy)};
}

// 4. Correlation of the LW null process against kappa.
Outcome kappa_crosscheck() {
  const int h = 100, reps = 50000;
  const std::vector<int> lags{0, h / 4, h / 2, h, 3 * h / 2, 2 * h};
  std::vector<std::vector<double>> a(lags.size()), b(lags.size());
  for (int rep = 0; rep < reps; ++rep) {
    SeededRng rng(2004, static_cast<std::uint64_t>(rep));
    const auto g = gamma_null_lw(4 * h, h, rng);
    for (std::size_t k = 0; k < lags.size(); ++k) {
      // Center h sits at position 0 of the process.
      a[k].push_back(g.values[0].x);
      b[k].push_back(g.values[static_cast<std::size_t>(lags[k])].x);
      a[k].push_back(g.values[0].y);
      b[k].push_back(g.values[static_cast<std::size_t>(lags[k])].y);
    }
  }
  double worst = 0.0;
  std::string detail;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const double emp = testing::correlation(a[k], b[k]);
    const double want = kappa(static_cast<double>(lags[k]) / h);
    worst = std::max(worst, std::abs(emp - want));
    detail += fmt("%s%d:%.3f/%.3f", k ? " " : "", lags[k], emp, want);
  }
  return {worst < 0.02, fmt("lag:empirical/kappa %s; max error %.4f", detail.c_str(), worst)};
}

struct NullRun {
  double rejection_rate = 0.0;
  double two_or_more = 0.0;
  double known_variance_rate = 0.0;  // control: G scaled with the true variance
};

NullRun null_runs(ModelKind kind, double sigma2, int h, std::uint64_t track_seed) {
  const std::int64_t T = 400;
  const NullSimConfig config{T, {h}, 2000, 0.05, 5000 + track_seed};
  const double q = threshold(config, kind).q;
  int rejected = 0, multi = 0, known = 0;
  const int runs = 1000;
  for (int k = 0; k < runs; ++k) {
    auto spec = testing::lw_spec({35}, {1}, std::sqrt(sigma2), {}, T, kind);
    const Track x = testing::simulate_seeded(spec, track_seed, static_cast<std::uint64_t>(k));
    const auto report = detect_multi_window(x, config, kind, {.threshold = q});
    rejected += report.verdict == Verdict::reject ? 1 : 0;
    multi += report.change_points.size() >= 2 ? 1 : 0;
    const auto g = kind == ModelKind::lw ? g_process_lw(x, h, sigma2) : g_process_rw(x, h, sigma2);
    known += g.max_norm() > q ? 1 : 0;
  }
  return {static_cast<double>(rejected) / runs, static_cast<double>(multi) / runs, static_cast<double>(known) / runs};
}

std::vector<NullRun> null_cache;

const std::vector<NullRun>& null_results() {
  if (null_cache.empty()) {
    null_cache.push_back(null_runs(ModelKind::lw, 0.25, 30, 51));
    null_cache.push_back(null_runs(ModelKind::lw, 1.0, 30, 52));
    null_cache.push_back(null_runs(ModelKind::rw, 0.25, 50, 53));
    null_cache.push_back(null_runs(ModelKind::rw, 1.0, 50, 54));
  }
  return null_cache;
}

// 5. Empirical significance level.
Outcome significance() {
  const auto& r = null_results();
  bool ok = true;
  std::string detail;
  const char* names[] = {"LW s2=0.25", "LW s2=1", "RW s2=0.25", "RW s2=1"};
  for (std::size_t k = 0; k < r.size(); ++k) {
    ok = ok && r[k].rejection_rate >= 0.035 && r[k].rejection_rate <= 0.065;
    detail += fmt("%s%s: %.3f", k ? ", " : "", names[k], r[k].rejection_rate);
  }
  std::string control;
  for (std::size_t k = 0; k < r.size(); ++k) control += fmt("%s%.3f", k ? " " : "", r[k].known_variance_rate);
  return {ok, "rejection rates " + detail + "; with the true variance in G: " + control};
}

// 6. Power grows with the direction change; LW beats RW.
Outcome power() {
  const std::int64_t T = 400;
  const int h = 30, runs = 500;
  const std::vector<double> angles{10, 30, 60, 90};
  std::vector<double> lw_power, rw_power;
  for (const auto kind : {ModelKind::lw, ModelKind::rw}) {
    const NullSimConfig config{T, {h}, 2000, 0.05, 6000};
    const double q = threshold(config, kind).q;
    for (const double a : angles) {
      int rejected = 0;
      for (int k = 0; k < runs; ++k) {
        const auto spec = testing::lw_spec({0, a}, {1, 1}, 0.5, {200}, T, kind);
        const Track x = testing::simulate_seeded(spec, 6001 + static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(k));
        rejected += test(x, config, kind, q).verdict == Verdict::reject ? 1 : 0;
      }
      (kind == ModelKind::lw ? lw_power : rw_power).push_back(static_cast<double>(rejected) / runs);
    }
  }
  bool ok = lw_power.back() > 0.9;
  for (std::size_t k = 1; k < angles.size(); ++k) ok = ok && lw_power[k] >= lw_power[k - 1] && rw_power[k] >= rw_power[k - 1];
  for (std::size_t k = 0; k < angles.size(); ++k) ok = ok && lw_power[k] >= rw_power[k];
  return {ok, fmt("LW %.3f %.3f %.3f %.3f; RW %.3f %.3f %.3f %.3f (10/30/60/90 deg)", lw_power[0], lw_power[1],
                  lw_power[2], lw_power[3], rw_power[0], rw_power[1], rw_power[2], rw_power[3])};
}

bool found_near(const std::vector<ChangePoint>& cps, std::int64_t truth) {
  return std::any_of(cps.begin(), cps.end(), [truth](const ChangePoint& c) {
    return 3 * std::abs(c.index - truth) <= c.window;
  });
}

// 7. Multiple windows recover all change points where one window does not.
Outcome multi_window() {
  const auto spec = testing::lw_spec({55, -55, -45, -45}, {1, 1, 1, 0.85}, 3.0, {50, 110, 345}, 530);
  const NullSimConfig multi{530, {30, 50, 100}, 2000, 0.05, 7000};
  const NullSimConfig single{530, {30}, 2000, 0.05, 7000};
  const double q_multi = threshold(multi, ModelKind::lw).q;
  const double q_single = threshold(single, ModelKind::lw).q;
  const int runs = 200;
  int all_three = 0, single_missed = 0;
  for (int k = 0; k < runs; ++k) {
    const Track x = testing::simulate_seeded(spec, 7001, static_cast<std::uint64_t>(k));
    const auto m = detect_multi_window(x, multi, ModelKind::lw, {.threshold = q_multi});
    all_three += found_near(m.change_points, 50) && found_near(m.change_points, 110) &&
                         found_near(m.change_points, 345)
                     ? 1
                     : 0;
    const auto s = detect_multi_window(x, single, ModelKind::lw, {.threshold = q_single});
    single_missed += found_near(s.change_points, 345) ? 0 : 1;
  }
  const bool ok = 2 * all_three >= runs && 2 * single_missed > runs;
  return {ok, fmt("H={30,50,100} found all three in %d/%d; H={30} missed 345 in %d/%d", all_three, runs,
                  single_missed, runs)};
}

// 8. At most 3% of null runs report two or more change points.
Outcome over_detection() {
  const auto& r = null_results();
  double worst = 0.0;
  for (const auto& n : r) worst = std::max(worst, n.two_or_more);
  return {worst <= 0.03, fmt(">=2 CPs: LW %.3f %.3f, RW %.3f %.3f", r[0].two_or_more, r[1].two_or_more,
                             r[2].two_or_more, r[3].two_or_more)};
}

// 9. Scaling time, window and change point location together.
Outcome asymptotics() {
  const int runs = 500;
  std::vector<double> detection, mse;
  for (const int n : {1, 2, 4}) {
    const std::int64_t T = 200 * n, cp = 100 * n;
    const int h = 30 * n;
    const auto spec = testing::lw_spec({35, 25}, {0.5, 0.5}, 0.5, {cp}, T);
    const NullSimConfig config{T, {h}, 1000, 0.05, 9000 + static_cast<std::uint64_t>(n)};
    const double q = threshold(config, ModelKind::lw).q;
    int detected = 0;
    double se = 0.0;
    for (int k = 0; k < runs; ++k) {
      const Track x = testing::simulate_seeded(spec, 9100 + static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
      const auto r = detect_multi_window(x, config, ModelKind::lw, {.threshold = q});
      if (r.change_points.empty()) continue;
      ++detected;
      std::int64_t best = r.change_points.front().index;
      for (const auto& c : r.change_points) {
        if (std::abs(c.index - cp) < std::abs(best - cp)) best = c.index;
      }
      const double d = static_cast<double>(best - cp) / n;
      se += d * d;
    }
    detection.push_back(static_cast<double>(detected) / runs);
    mse.push_back(detected ? se / detected : std::numeric_limits<double>::infinity());
  }
  const bool ok = detection[1] >= detection[0] && detection[2] >= detection[1] && mse[1] <= mse[0] && mse[2] <= mse[1];
  return {ok, fmt("detection %.3f %.3f %.3f; scaled MSE %.2f %.2f %.2f (n=1,2,4)", detection[0], detection[1],
                  detection[2], mse[0], mse[1], mse[2])};
}

// 10. Leaf classification of detected change points.
Outcome leaf_discrimination() {
  struct Case {
    ModelSpec spec;
    std::int64_t cp;
    CpClass want;
    const char* name;
  };
  const std::vector<Case> cases{
      {testing::lw_spec({-135, 10}, {0.1, 0.1}, 0.15, {200}, 400), 200, CpClass::direction, "direction"},
      {testing::lw_spec({35, 35}, {0.1, 0.5}, 0.25, {100}, 300), 100, CpClass::step_length, "step_length"},
      {testing::lw_spec({-105, 10}, {0.1, 0.25}, 0.25, {200}, 400), 200, CpClass::both, "both"},
  };
  const int runs = 200, h = 30;
  bool ok = true;
  std::string detail;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& cs = cases[c];
    const NullSimConfig config{cs.spec.horizon, {h}, 1000, 0.05, 10000 + c};
    const double q = threshold(config, ModelKind::lw).q;
    int correct = 0;
    for (int k = 0; k < runs; ++k) {
      const Track x = testing::simulate_seeded(cs.spec, 10100 + c, static_cast<std::uint64_t>(k));
      const auto r = detect_multi_window(x, config, ModelKind::lw, {.threshold = q, .classify = true});
      const ChangePoint* best = nullptr;
      for (const auto& p : r.change_points) {
        if (std::abs(p.index - cs.cp) <= h && (!best || std::abs(p.index - cs.cp) < std::abs(best->index - cs.cp))) {
          best = &p;
        }
      }
      correct += best && best->cls == cs.want ? 1 : 0;
    }
    ok = ok && 5 * correct >= 4 * runs;
    detail += fmt("%s%s %d/%d", c ? ", " : "", cs.name, correct, runs);
  }
  return {ok, detail};
}

struct CliResult {
  int code;
  std::string out;
};

CliResult cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "linwalk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

// 11. Byte-identical repeated runs and lossless formats.
Outcome determinism_and_formats() {
  const auto dir = std::filesystem::temp_directory_path() / ("linwalk_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string csv = (dir / "t.csv").string();
  std::vector<std::string> failures;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) failures.push_back(what);
  };

  const std::vector<std::string> sim{"simulate", "--thetas", "55,-55,-45,-45", "--r", "1,1,1,0.85", "--cps",
                                     "50,110,345", "--sigma2", "9", "--T", "530", "--n", "3", "--seed", "11"};
  const auto s1 = cli_run(sim), s2 = cli_run(sim);
  expect(s1.code == 0 && s1.out == s2.out, "simulate output differs between runs");
  write_text_file(csv, s1.out);

  const std::vector<std::string> det{"detect", "--in", csv, "--windows", "30,50,100", "--sims", "300", "--classify",
                                     "--seed", "11", "--leaf-dir", (dir / "leaves").string()};
  const auto d1 = cli_run(det), d2 = cli_run(det);
  expect(d1.code == 0 && d1.out == d2.out, "detect output differs between runs");
  const auto t1 = cli_run({"threshold", "--T", "530", "--windows", "30,50,100", "--sims", "300", "--seed", "11"});
  const auto t2 = cli_run({"threshold", "--T", "530", "--windows", "30,50,100", "--sims", "300", "--seed", "11"});
  expect(t1.code == 0 && t1.out == t2.out, "threshold output differs between runs");

  const auto tracks = parse_tracks(s1.out);
  expect(tracks_csv(tracks) == s1.out, "track CSV does not round trip byte for byte");
  const auto again = parse_tracks(tracks_csv(tracks));
  bool same = again.size() == tracks.size();
  for (std::size_t k = 0; same && k < tracks.size(); ++k) {
    for (std::size_t j = 0; j < tracks[k].positions.size(); ++j) {
      same = same && again[k].positions[j].x == tracks[k].positions[j].x &&
             again[k].positions[j].y == tracks[k].positions[j].y;
    }
  }
  expect(same, "track values do not round trip");

  const auto reports = parse_reports(d1.out);
  expect(reports.size() == 3, "detect did not report three tracks");
  expect(reports_json(reports) == d1.out, "report JSON does not round trip byte for byte");
  expect(parse_reports(reports_json(reports)) == reports, "report values do not round trip");

  for (const auto& t : tracks) {
    const auto svg = read_text_file(dir / "leaves" / (t.id + ".svg"));
    expect(testing::well_formed_xml(svg), "leaf SVG is not well-formed XML");
  }
  std::filesystem::remove_all(dir);
  std::string detail = failures.empty() ? "simulate/detect/threshold byte-identical; CSV, JSON round trips; SVG well-formed"
                                        : failures.front();
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 means no limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "weight identities", 1.0, weight_identities},
      {2, "least-squares oracle", 5.0, ols_oracle},
      {3, "unbiasedness", 30.0, unbiasedness},
      {4, "kappa cross-check", 120.0, kappa_crosscheck},
      {5, "significance level", 300.0, significance},
      {6, "power monotonicity", 0.0, power},
      {7, "multi-window scenario", 0.0, multi_window},
      {8, "null over-detection", 0.0, over_detection},
      {9, "asymptotic behaviour", 0.0, asymptotics},
      {10, "leaf-plot discrimination", 0.0, leaf_discrimination},
      {11, "determinism and formats", 0.0, determinism_and_formats},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s limit]", c.limit_s);
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %-26s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
