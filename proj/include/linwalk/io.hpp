#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linwalk/detect.hpp"
#include "linwalk/model.hpp"
#include "linwalk/types.hpp"

namespace linwalk {

inline constexpr int kFormatVersion = 1;

/// printf-style %.{precision}g; the default round-trips every double.
[[nodiscard]] std::string format_double(double v, int precision = 17);

void write_text_file(const std::filesystem::path& path, std::string_view content);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

/// Malformed track CSV. row is the 1-based data row (header and comment
/// lines excluded), line the 1-based physical line.
class TrackFormatError : public ValidationError {
 public:
  TrackFormatError(const std::string& what, std::size_t row, std::size_t line)
      : ValidationError(what), row_(row), line_(line) {}
  [[nodiscard]] std::size_t row() const { return row_; }
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t row_;
  std::size_t line_;
};

// Track CSV: optional '#' comment lines, header "track_id,t,x,y", one row per
// observation. Tracks come back in order of first appearance, sorted by t.
[[nodiscard]] std::vector<Track> parse_tracks(std::string_view text);
[[nodiscard]] std::vector<Track> read_tracks(const std::filesystem::path& path);
[[nodiscard]] std::string tracks_csv(std::span<const Track> tracks);
void write_tracks(std::span<const Track> tracks, const std::filesystem::path& path);
void write_track(const Track& track, const std::filesystem::path& path);

/// One detection result as serialized to JSON. Numeric fields are empty
/// when processing the track failed; error then holds the reason.
struct ReportRecord {
  std::string track_id;
  ModelKind model = ModelKind::lw;
  std::vector<int> windows;
  double alpha = 0.05;
  int sims = 0;
  std::uint64_t seed = 0;
  std::optional<double> m;
  std::optional<double> q;
  std::optional<Verdict> verdict;
  std::vector<ChangePoint> change_points;
  std::optional<double> sigma2_hat;
  std::optional<std::string> error;

  friend bool operator==(const ReportRecord&, const ReportRecord&) = default;
};

[[nodiscard]] ReportRecord make_record(const std::string& track_id, ModelKind model, const NullSimConfig& config,
                                       const DetectionReport& report, std::optional<double> sigma2_hat);

/// Single-line object with fixed key order and %.17g numbers.
[[nodiscard]] std::string report_json(const ReportRecord& record);
/// JSON array of records.
[[nodiscard]] std::string reports_json(std::span<const ReportRecord> records);
void write_report(const ReportRecord& record, const std::filesystem::path& path);
void write_reports(std::span<const ReportRecord> records, const std::filesystem::path& path);
/// Accepts a single object or an array of objects.
[[nodiscard]] std::vector<ReportRecord> parse_reports(std::string_view text);
[[nodiscard]] std::vector<ReportRecord> read_reports(const std::filesystem::path& path);

[[nodiscard]] std::string spec_json(const ModelSpec& spec, const std::string& track_id);
[[nodiscard]] std::string specs_json(std::span<const std::pair<std::string, ModelSpec>> specs);
[[nodiscard]] std::vector<std::pair<std::string, ModelSpec>> parse_specs(std::string_view text);

}  // namespace linwalk
