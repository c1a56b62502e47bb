#include "linwalk/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace linwalk {
namespace {

using nlohmann::json;

constexpr std::string_view kTrackHeader = "track_id,t,x,y";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc{} && res.ptr == field.data() + field.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

struct Observation {
  std::int64_t t;
  Vec2 p;
  std::size_t row;
  std::size_t line;
};

std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (const char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(ch)));
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

std::string json_number(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return "null";
  return format_double(*v);
}

template <typename T, typename F>
std::string json_array(const std::vector<T>& items, F&& fmt) {
  std::string out = "[";
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) out += ", ";
    out += fmt(items[k]);
  }
  return out + "]";
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ReportRecord record_from_json(const json& j) {
  ReportRecord r;
  r.track_id = j.at("track_id").get<std::string>();
  r.model = parse_model_kind(j.at("model").get<std::string>());
  r.windows = j.at("windows").get<std::vector<int>>();
  r.alpha = j.at("alpha").get<double>();
  r.sims = j.at("sims").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.m = optional_number(j, "M");
  r.q = optional_number(j, "Q");
  if (j.contains("verdict") && !j.at("verdict").is_null()) {
    const auto v = j.at("verdict").get<std::string>();
    if (v != "reject" && v != "retain") throw ValidationError("report: unknown verdict '" + v + "'");
    r.verdict = v == "reject" ? Verdict::reject : Verdict::retain;
  }
  for (const auto& cp : j.at("change_points")) {
    r.change_points.push_back(
        {cp.at("index").get<std::int64_t>(), cp.at("window").get<int>(), parse_cp_class(cp.at("class").get<std::string>())});
  }
  r.sigma2_hat = optional_number(j, "sigma2_hat");
  if (j.contains("error") && !j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  return r;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Track> parse_tracks(std::string_view text) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<Observation>> by_id;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kTrackHeader) {
        throw TrackFormatError("line " + std::to_string(line_no) + ": expected header '" +
                                   std::string(kTrackHeader) + "'",
                               0, line_no);
      }
      header_seen = true;
      continue;
    }
    ++row;
    const auto where = "row " + std::to_string(row) + " (line " + std::to_string(line_no) + ")";
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw TrackFormatError(where + ": expected 4 fields, got " + std::to_string(fields.size()), row, line_no);
    }
    const std::string id(trim(fields[0]));
    if (id.empty()) throw TrackFormatError(where + ": empty track_id", row, line_no);
    Observation obs{0, {}, row, line_no};
    if (!parse_number(fields[1], obs.t)) {
      throw TrackFormatError(where + ": t '" + std::string(trim(fields[1])) + "' is not an integer", row, line_no);
    }
    if (!parse_number(fields[2], obs.p.x) || !parse_number(fields[3], obs.p.y) || !std::isfinite(obs.p.x) ||
        !std::isfinite(obs.p.y)) {
      throw TrackFormatError(where + ": x and y must be finite decimals", row, line_no);
    }
    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(obs);
  }
  if (!header_seen) throw TrackFormatError("missing header '" + std::string(kTrackHeader) + "'", 0, line_no);

  std::vector<Track> tracks;
  for (const auto& id : order) {
    auto& obs = by_id[id];
    std::stable_sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) { return a.t < b.t; });
    for (std::size_t k = 1; k < obs.size(); ++k) {
      if (obs[k].t == obs[k - 1].t) {
        throw TrackFormatError("track '" + id + "': duplicate t=" + std::to_string(obs[k].t) + " at row " +
                                   std::to_string(std::max(obs[k].row, obs[k - 1].row)),
                               std::max(obs[k].row, obs[k - 1].row), std::max(obs[k].line, obs[k - 1].line));
      }
      if (obs[k].t != obs[k - 1].t + 1) {
        throw TrackFormatError("track '" + id + "': gap in t from " + std::to_string(obs[k - 1].t) + " to " +
                                   std::to_string(obs[k].t) + " at row " + std::to_string(obs[k].row),
                               obs[k].row, obs[k].line);
      }
    }
    Track track{id, obs.front().t, {}};
    track.positions.reserve(obs.size());
    for (const auto& o : obs) track.positions.push_back(o.p);
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::vector<Track> read_tracks(const std::filesystem::path& path) { return parse_tracks(read_text_file(path)); }

std::string tracks_csv(std::span<const Track> tracks) {
  std::string out = "# format_version: " + std::to_string(kFormatVersion) + "\n" + std::string(kTrackHeader) + "\n";
  for (const auto& track : tracks) {
    validate(track);
    if (track.id.empty() || track.id.find_first_of(",\n\r#") != std::string::npos) {
      throw ValidationError("track id '" + track.id + "' cannot be written to CSV");
    }
    for (std::int64_t k = 0; k < track.size(); ++k) {
      const Vec2& p = track.positions[static_cast<std::size_t>(k)];
      out += track.id;
      out += ',';
      out += std::to_string(track.first_t + k);
      out += ',';
      out += format_double(p.x);
      out += ',';
      out += format_double(p.y);
      out += '\n';
    }
  }
  return out;
}

void write_tracks(std::span<const Track> tracks, const std::filesystem::path& path) {
  write_text_file(path, tracks_csv(tracks));
}

void write_track(const Track& track, const std::filesystem::path& path) {
  write_tracks(std::span<const Track>(&track, 1), path);
}

ReportRecord make_record(const std::string& track_id, ModelKind model, const NullSimConfig& config,
                         const DetectionReport& report, std::optional<double> sigma2_hat) {
  ReportRecord r;
  r.track_id = track_id;
  r.model = model;
  r.windows = report.windows;
  r.alpha = config.alpha;
  r.sims = config.sims;
  r.seed = config.seed;
  r.m = report.m;
  r.q = report.q;
  r.verdict = report.verdict;
  r.change_points = report.change_points;
  r.sigma2_hat = sigma2_hat;
  return r;
}

std::string report_json(const ReportRecord& r) {
  std::string out = "{";
  out += "\"format_version\": " + std::to_string(kFormatVersion);
  out += ", \"track_id\": " + json_string(r.track_id);
  out += ", \"model\": " + json_string(to_string(r.model));
  out += ", \"windows\": " + json_array(r.windows, [](int h) { return std::to_string(h); });
  out += ", \"alpha\": " + format_double(r.alpha);
  out += ", \"sims\": " + std::to_string(r.sims);
  out += ", \"seed\": " + std::to_string(r.seed);
  out += ", \"M\": " + json_number(r.m);
  out += ", \"Q\": " + json_number(r.q);
  out += ", \"verdict\": " + (r.verdict ? json_string(to_string(*r.verdict)) : std::string("null"));
  out += ", \"change_points\": " + json_array(r.change_points, [](const ChangePoint& cp) {
           return "{\"index\": " + std::to_string(cp.index) + ", \"window\": " + std::to_string(cp.window) +
                  ", \"class\": " + json_string(to_string(cp.cls)) + "}";
         });
  out += ", \"sigma2_hat\": " + json_number(r.sigma2_hat);
  if (r.error) out += ", \"error\": " + json_string(*r.error);
  return out + "}";
}

std::string reports_json(std::span<const ReportRecord> records) {
  std::string out = "[";
  for (std::size_t k = 0; k < records.size(); ++k) {
    out += k ? ",\n " : "\n ";
    out += report_json(records[k]);
  }
  return out + (records.empty() ? "]\n" : "\n]\n");
}

void write_report(const ReportRecord& record, const std::filesystem::path& path) {
  write_text_file(path, report_json(record) + "\n");
}

void write_reports(std::span<const ReportRecord> records, const std::filesystem::path& path) {
  write_text_file(path, reports_json(records));
}

std::vector<ReportRecord> parse_reports(std::string_view text) {
  const json j = parse_json(text, "report");
  std::vector<ReportRecord> out;
  try {
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(record_from_json(item));
    } else {
      out.push_back(record_from_json(j));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  return out;
}

std::vector<ReportRecord> read_reports(const std::filesystem::path& path) {
  return parse_reports(read_text_file(path));
}

std::string spec_json(const ModelSpec& spec, const std::string& track_id) {
  auto numbers = [](const std::vector<double>& v) { return json_array(v, [](double x) { return format_double(x); }); };
  std::string out = "{";
  out += "\"format_version\": " + std::to_string(kFormatVersion);
  out += ", \"track_id\": " + json_string(track_id);
  out += ", \"model\": " + json_string(to_string(spec.kind));
  out += ", \"thetas\": " + numbers(spec.thetas);
  out += ", \"step_lengths\": " + numbers(spec.step_lengths);
  out += ", \"b1\": [" + format_double(spec.b1.x) + ", " + format_double(spec.b1.y) + "]";
  out += ", \"sigma2\": " + format_double(spec.sigma2);
  out += ", \"change_points\": " +
         json_array(spec.change_points, [](std::int64_t c) { return std::to_string(c); });
  out += ", \"horizon\": " + std::to_string(spec.horizon);
  return out + "}";
}

std::string specs_json(std::span<const std::pair<std::string, ModelSpec>> specs) {
  std::string out = "[";
  for (std::size_t k = 0; k < specs.size(); ++k) {
    out += k ? ",\n " : "\n ";
    out += spec_json(specs[k].second, specs[k].first);
  }
  return out + (specs.empty() ? "]\n" : "\n]\n");
}

std::vector<std::pair<std::string, ModelSpec>> parse_specs(std::string_view text) {
  const json j = parse_json(text, "spec");
  std::vector<std::pair<std::string, ModelSpec>> out;
  auto one = [&](const json& o) {
    ModelSpec s;
    s.kind = parse_model_kind(o.at("model").get<std::string>());
    s.thetas = o.at("thetas").get<std::vector<double>>();
    s.step_lengths = o.at("step_lengths").get<std::vector<double>>();
    const auto b1 = o.at("b1").get<std::vector<double>>();
    if (b1.size() != 2) throw ValidationError("spec: b1 must have two entries");
    s.b1 = {b1[0], b1[1]};
    s.sigma2 = o.at("sigma2").get<double>();
    s.change_points = o.at("change_points").get<std::vector<std::int64_t>>();
    s.horizon = o.at("horizon").get<std::int64_t>();
    out.emplace_back(o.value("track_id", std::string{}), std::move(s));
  };
  try {
    if (j.is_array()) {
      for (const auto& o : j) one(o);
    } else {
      one(j);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("spec: ") + e.what());
  }
  return out;
}

}  // namespace linwalk
