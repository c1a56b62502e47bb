#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "linwalk/detect.hpp"
#include "linwalk/estimate.hpp"
#include "linwalk/io.hpp"
#include "linwalk/leaf.hpp"
#include "linwalk/model.hpp"
#include "linwalk/parallel.hpp"
#include "linwalk/statistic.hpp"

namespace linwalk::cli {
namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
  std::vector<T> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    T value{};
    const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      throw ValidationError(flag + ": cannot parse '" + item + "'");
    }
    out.push_back(value);
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

double deg_to_rad(double deg) { return deg / 180.0 * std::numbers::pi; }

struct Globals {
  std::uint64_t seed = 1;
  std::string model = "lw";
  std::string out;
};

struct DetectionArgs {
  std::string windows;
  double alpha = 0.05;
  int sims = 1000;
};

void add_detection_options(CLI::App* sub, DetectionArgs& args) {
  sub->add_option("--windows", args.windows, "comma-separated window sizes (default 30 for lw, 50 for rw)");
  sub->add_option("--alpha", args.alpha, "significance level in (0, 1)")->capture_default_str();
  sub->add_option("--sims", args.sims, "null simulations for the threshold")->capture_default_str();
}

std::vector<int> resolve_windows(const DetectionArgs& args, ModelKind kind) {
  if (args.windows.empty()) return {kind == ModelKind::lw ? 30 : 50};
  return parse_list<int>(args.windows, "--windows");
}

void check_detection_args(const DetectionArgs& args, const std::vector<int>& windows) {
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) throw ValidationError("--alpha must lie in (0, 1)");
  if (args.sims < 1) throw ValidationError("--sims must be >= 1");
  if (windows.empty()) throw ValidationError("--windows is empty");
  for (const int h : windows) {
    if (h < 3) throw ValidationError("--windows entries must be >= 3");
  }
}

void emit(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_text_file(path, content);
  }
}

// Thresholds depend only on (T, H, S, alpha, seed, model); tracks of equal
// length share one simulation.
class ThresholdCache {
 public:
  double get(const NullSimConfig& config, ModelKind kind, std::ostream& err) {
    const auto it = cache_.find(config.T);
    if (it != cache_.end()) return it->second;
    const ThresholdResult r = threshold(config, kind);
    if (r.ill_resolved) {
      err << "warning: sims * alpha < 1, the quantile is ill-resolved\n";
    }
    cache_.emplace(config.T, r.q);
    return r.q;
  }

 private:
  std::map<std::int64_t, double> cache_;
};

std::string safe_file_stem(const std::string& id) {
  std::string out;
  for (const char ch : id) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '-' || ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  return out.empty() ? "track" : out;
}

struct TrackDetection {
  DetectionReport report;
  NullSimConfig config;
};

TrackDetection detect_track(const Track& track, ModelKind kind, const std::vector<int>& windows,
                            const DetectionArgs& args, std::uint64_t seed, bool classify_cps,
                            ThresholdCache& cache, std::ostream& err) {
  TrackDetection td;
  td.config = null_config_for(track, windows, args.sims, args.alpha, seed);
  validate(td.config);
  DetectOptions options;
  options.threshold = cache.get(td.config, kind, err);
  options.classify = classify_cps;
  td.report = detect_multi_window(track, td.config, kind, options);
  return td;
}

std::vector<std::int64_t> cp_indices(const DetectionReport& report) {
  std::vector<std::int64_t> out;
  for (const auto& cp : report.change_points) out.push_back(cp.index);
  return out;
}

ReportRecord error_record(const Track& track, ModelKind kind, std::vector<int> windows, const DetectionArgs& args,
                          std::uint64_t seed, const std::string& message) {
  ReportRecord r;
  r.track_id = track.id;
  r.model = kind;
  std::sort(windows.begin(), windows.end());
  r.windows = std::move(windows);
  r.alpha = args.alpha;
  r.sims = args.sims;
  r.seed = seed;
  r.error = message;
  return r;
}

int cmd_simulate(const Globals& g, const std::string& thetas_deg, const std::string& r_list, double sigma2,
                 std::int64_t horizon, const std::string& cps, const std::string& b1, int count,
                 std::ostream& out) {
  ModelSpec spec;
  spec.kind = parse_model_kind(g.model);
  for (const double d : parse_list<double>(thetas_deg, "--thetas")) spec.thetas.push_back(deg_to_rad(d));
  spec.step_lengths = parse_list<double>(r_list, "--r");
  spec.change_points = parse_list<std::int64_t>(cps, "--cps");
  spec.sigma2 = sigma2;
  spec.horizon = horizon;
  if (!b1.empty()) {
    const auto b = parse_list<double>(b1, "--b1");
    if (b.size() != 2) throw ValidationError("--b1 needs two comma-separated values");
    spec.b1 = {b[0], b[1]};
  }
  if (spec.thetas.size() != spec.step_lengths.size()) {
    throw ValidationError("--thetas has " + std::to_string(spec.thetas.size()) + " entries but --r has " +
                          std::to_string(spec.step_lengths.size()));
  }
  if (count < 1) throw ValidationError("--n must be >= 1");
  validate(spec);
  std::vector<Track> tracks;
  for (int k = 0; k < count; ++k) {
    SeededRng rng(g.seed, static_cast<std::uint64_t>(k));
    tracks.push_back(simulate(spec, rng, "track_" + std::to_string(k)));
  }
  emit(tracks_csv(tracks), g.out, out);
  return 0;
}

int cmd_threshold(const Globals& g, const DetectionArgs& args, std::int64_t horizon, std::ostream& out,
                  std::ostream& err) {
  const ModelKind kind = parse_model_kind(g.model);
  const auto windows = resolve_windows(args, kind);
  check_detection_args(args, windows);
  NullSimConfig config{horizon, windows, args.sims, args.alpha, g.seed};
  const ThresholdResult r = threshold(config, kind);
  if (r.ill_resolved) err << "warning: sims * alpha < 1, the quantile is ill-resolved\n";
  emit(format_double(r.q) + "\n", g.out, out);
  return 0;
}

int cmd_detect(const Globals& g, const DetectionArgs& args, const std::string& input, bool classify_cps,
               const std::string& leaf_dir, std::ostream& out, std::ostream& err) {
  const ModelKind kind = parse_model_kind(g.model);
  const auto windows = resolve_windows(args, kind);
  check_detection_args(args, windows);
  const auto tracks = read_tracks(input);
  if (!leaf_dir.empty()) std::filesystem::create_directories(leaf_dir);

  ThresholdCache cache;
  std::vector<ReportRecord> records;
  for (const auto& track : tracks) {
    try {
      const bool want_classes = classify_cps || !leaf_dir.empty();
      const TrackDetection td = detect_track(track, kind, windows, args, g.seed, want_classes, cache, err);
      const auto cps = cp_indices(td.report);
      std::optional<double> sigma2;
      try {
        sigma2 = robust_sigma2(track, td.config.windows.front(), kind, cps);
      } catch (const EstimationError&) {
        sigma2.reset();
      }
      records.push_back(make_record(track.id, kind, td.config, td.report, sigma2));
      if (!leaf_dir.empty()) {
        LeafSeries series = leaf_series(track, td.config.windows.front(), kind, cps);
        for (auto& m : series.markers) {
          for (const auto& cp : td.report.change_points) {
            if (cp.index == m.index) m.cls = cp.cls;
          }
        }
        render_svg(series, std::filesystem::path(leaf_dir) / (safe_file_stem(track.id) + ".svg"), track.id);
      }
    } catch (const ValidationError& e) {
      records.push_back(error_record(track, kind, windows, args, g.seed, e.what()));
      err << "track '" << track.id << "': " << e.what() << "\n";
    } catch (const DegenerateTrackError& e) {
      records.push_back(error_record(track, kind, windows, args, g.seed, e.what()));
      err << "track '" << track.id << "': " << e.what() << "\n";
    }
  }
  emit(reports_json(records), g.out, out);
  return 0;
}

int cmd_leafplot(const Globals& g, const DetectionArgs& args, const std::string& input, int h, bool mark,
                 std::ostream& err) {
  const ModelKind kind = parse_model_kind(g.model);
  if (g.out.empty()) throw ValidationError("leafplot: --out must name an output directory");
  const int window = h > 0 ? h : (kind == ModelKind::lw ? 30 : 50);
  std::vector<int> windows = args.windows.empty() ? std::vector<int>{window} : resolve_windows(args, kind);
  check_detection_args(args, windows);
  const auto tracks = read_tracks(input);
  std::filesystem::create_directories(g.out);
  ThresholdCache cache;
  for (const auto& track : tracks) {
    std::vector<ChangePoint> cps;
    if (mark) cps = detect_track(track, kind, windows, args, g.seed, false, cache, err).report.change_points;
    std::vector<std::int64_t> idx;
    for (const auto& cp : cps) idx.push_back(cp.index);
    LeafSeries series = leaf_series(track, window, kind, idx);
    for (auto& m : series.markers) m.cls = classify(series, m.index);
    const auto stem = std::filesystem::path(g.out) / safe_file_stem(track.id);
    write_leaf_csv(series, stem.string() + ".csv");
    render_svg(series, stem.string() + ".svg", track.id);
  }
  return 0;
}

int cmd_refit(const Globals& g, const DetectionArgs& args, const std::string& input, const std::string& cps_text,
              const std::string& simulate_out, std::ostream& out, std::ostream& err) {
  const ModelKind kind = parse_model_kind(g.model);
  const auto windows = resolve_windows(args, kind);
  check_detection_args(args, windows);
  const auto fixed_cps = parse_list<std::int64_t>(cps_text, "--cps");
  const auto tracks = read_tracks(input);
  ThresholdCache cache;
  std::vector<std::pair<std::string, ModelSpec>> specs;
  std::vector<Track> simulated;
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const Track& track = tracks[k];
    std::vector<std::int64_t> cps = fixed_cps;
    if (cps_text.empty()) {
      cps = cp_indices(detect_track(track, kind, windows, args, g.seed, false, cache, err).report);
    }
    const int h = *std::min_element(windows.begin(), windows.end());
    ModelSpec spec = piecewise_refit(track, cps, h, kind);
    if (!simulate_out.empty()) {
      SeededRng rng(g.seed, static_cast<std::uint64_t>(k));
      simulated.push_back(simulate(spec, rng, track.id + "_sim"));
    }
    specs.emplace_back(track.id, std::move(spec));
  }
  emit(specs_json(specs), g.out, out);
  if (!simulate_out.empty()) write_tracks(simulated, simulate_out);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Change point detection for Linear Walk and Random Walk tracks", "linwalk"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "master seed for all simulations")->capture_default_str();
  app.add_option("--model", g.model, "movement model: lw or rw")->capture_default_str();
  app.add_option("--out", g.out, "output path (stdout when omitted)");

  auto* sim = app.add_subcommand("simulate", "simulate LW/RW tracks");
  std::string thetas, r_list, cps, b1;
  double sigma2 = 0.0;
  std::int64_t horizon = 0;
  int count = 1;
  sim->add_option("--thetas", thetas, "directions in degrees, comma-separated")->required();
  sim->add_option("--r", r_list, "step lengths, comma-separated")->required();
  sim->add_option("--sigma2", sigma2, "noise variance")->required();
  sim->add_option("--T", horizon, "number of time steps")->required();
  sim->add_option("--cps", cps, "change points, comma-separated");
  sim->add_option("--b1", b1, "start offset x,y");
  sim->add_option("--n", count, "number of tracks")->capture_default_str();

  DetectionArgs args;
  auto* thr = app.add_subcommand("threshold", "simulate the rejection threshold Q");
  add_detection_options(thr, args);
  std::int64_t thr_horizon = 0;
  thr->add_option("--T", thr_horizon, "track length")->required();

  auto* det = app.add_subcommand("detect", "test and estimate change points per track");
  add_detection_options(det, args);
  std::string input, leaf_dir;
  bool classify_cps = false;
  det->add_option("--in", input, "track CSV")->required();
  det->add_flag("--classify", classify_cps, "classify change points from leaf series");
  det->add_option("--leaf-dir", leaf_dir, "write one leaf-plot SVG per track into this directory");

  auto* leaf = app.add_subcommand("leafplot", "write leaf-plot CSV and SVG per track into --out");
  leaf->set_help_flag("--help", "print this help message and exit");
  add_detection_options(leaf, args);
  int leaf_h = 0;
  bool mark = false;
  leaf->add_option("--in", input, "track CSV")->required();
  leaf->add_option("--h", leaf_h, "window (default 30 for lw, 50 for rw)");
  leaf->add_flag("--detect", mark, "run detection and mark classified change points");

  auto* refit = app.add_subcommand("refit", "fit piecewise parameters between change points");
  add_detection_options(refit, args);
  std::string refit_cps, simulate_out;
  refit->add_option("--in", input, "track CSV")->required();
  refit->add_option("--cps", refit_cps, "use these change points instead of detecting");
  refit->add_option("--simulate-out", simulate_out, "simulate one track per refitted spec into this CSV");

  for (auto* sub : {sim, thr, det, leaf, refit}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    apply_thread_limit_from_env();
    if (sim->parsed()) return cmd_simulate(g, thetas, r_list, sigma2, horizon, cps, b1, count, out);
    if (thr->parsed()) return cmd_threshold(g, args, thr_horizon, out, err);
    if (det->parsed()) return cmd_detect(g, args, input, classify_cps, leaf_dir, out, err);
    if (leaf->parsed()) return cmd_leafplot(g, args, input, leaf_h, mark, err);
    if (refit->parsed()) return cmd_refit(g, args, input, refit_cps, simulate_out, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace linwalk::cli
