#pragma once

// Engagement and evaluation report rows and their CSV/JSON encodings.
// Reals are always written with six decimals so output is byte-stable.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sem/config.hpp"
#include "sem/csv.hpp"
#include "sem/engagement.hpp"
#include "sem/evaluation.hpp"

namespace sem {

struct VideoRow {
  std::string video_id;
  std::string playlist_id;
  std::uint64_t views = 0;
  std::uint64_t likes = 0;
  double nv = 0.0;
  double nl = 0.0;
  double p = 0.0;
  double e = 0.0;
  Tier tier = Tier::poor;
  std::size_t n_scored = 0;
  bool no_comments = true;
};

// A playlist without videos has no polarity or engagement; those fields are
// left empty (CSV) or null (JSON).
struct PlaylistRow {
  std::string playlist_id;
  std::optional<double> p_p;
  std::optional<double> e;
  std::optional<Tier> tier;
  std::size_t n_videos = 0;
};

struct EngagementReport {
  std::vector<VideoRow> videos;        // sorted by (playlist_id, video_id)
  std::vector<PlaylistRow> playlists;  // sorted by playlist_id
};

inline std::string fixed6(double x) {
  std::string s = fmt::format("{:.6f}", x);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

inline constexpr std::string_view kVideosReport = "videos_engagement";
inline constexpr std::string_view kPlaylistsReport = "playlists_engagement";
inline constexpr std::string_view kEvalReport = "eval_report";

namespace detail {

inline std::string json_str(std::string_view s) { return nlohmann::json(s).dump(); }

template <class Row, class Fields>
std::string json_array(const std::vector<Row>& rows, Fields fields) {
  std::string out = "[";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += k ? ",\n  {" : "\n  {";
    const auto kv = fields(rows[k]);
    for (std::size_t f = 0; f < kv.size(); ++f) {
      if (f) out += ", ";
      out += json_str(kv[f].first);
      out += ": ";
      out += kv[f].second;
    }
    out += "}";
  }
  out += rows.empty() ? "]\n" : "\n]\n";
  return out;
}

using Fields = std::vector<std::pair<std::string, std::string>>;

inline Fields video_fields(const VideoRow& r) {
  return {{"video_id", json_str(r.video_id)},
          {"playlist_id", json_str(r.playlist_id)},
          {"views", std::to_string(r.views)},
          {"likes", std::to_string(r.likes)},
          {"nv", fixed6(r.nv)},
          {"nl", fixed6(r.nl)},
          {"p", fixed6(r.p)},
          {"e", fixed6(r.e)},
          {"tier", json_str(to_string(r.tier))},
          {"n_scored", std::to_string(r.n_scored)},
          {"no_comments", r.no_comments ? "true" : "false"}};
}

inline Fields playlist_fields(const PlaylistRow& r) {
  return {{"playlist_id", json_str(r.playlist_id)},
          {"p_p", r.p_p ? fixed6(*r.p_p) : "null"},
          {"e", r.e ? fixed6(*r.e) : "null"},
          {"tier", r.tier ? json_str(to_string(*r.tier)) : "null"},
          {"n_videos", std::to_string(r.n_videos)}};
}

}  // namespace detail

inline std::string format_videos(const EngagementReport& report, ReportFormat format) {
  if (format == ReportFormat::json) return detail::json_array(report.videos, detail::video_fields);
  std::string out;
  csv::append_row(out, {"video_id", "playlist_id", "views", "likes", "nv", "nl", "p", "e", "tier",
                        "n_scored", "no_comments"});
  for (const VideoRow& r : report.videos) {
    csv::append_row(out, {r.video_id, r.playlist_id, std::to_string(r.views),
                          std::to_string(r.likes), fixed6(r.nv), fixed6(r.nl), fixed6(r.p),
                          fixed6(r.e), to_string(r.tier), std::to_string(r.n_scored),
                          r.no_comments ? "true" : "false"});
  }
  return out;
}

inline std::string format_playlists(const EngagementReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    return detail::json_array(report.playlists, detail::playlist_fields);
  }
  std::string out;
  csv::append_row(out, {"playlist_id", "p_p", "e", "tier", "n_videos"});
  for (const PlaylistRow& r : report.playlists) {
    csv::append_row(out, {r.playlist_id, r.p_p ? fixed6(*r.p_p) : "", r.e ? fixed6(*r.e) : "",
                          r.tier ? to_string(*r.tier) : "", std::to_string(r.n_videos)});
  }
  return out;
}

inline std::filesystem::path report_path(const std::filesystem::path& dir, std::string_view stem,
                                         ReportFormat format) {
  return dir / (std::string(stem) + "." + to_string(format));
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(Errc::io_error, "cannot create output directory " + dir.string(), dir.string());
  }
}

/// Writes the video and playlist reports into `dir`; returns the paths.
inline std::vector<std::filesystem::path> emit_report(const EngagementReport& report,
                                                      ReportFormat format,
                                                      const std::filesystem::path& dir) {
  ensure_directory(dir);
  const auto videos = report_path(dir, kVideosReport, format);
  const auto playlists = report_path(dir, kPlaylistsReport, format);
  csv::write_file(videos, format_videos(report, format));
  csv::write_file(playlists, format_playlists(report, format));
  return {videos, playlists};
}

/// Table-shaped summary (Model, Accuracy, Recall, F1-Score). Recall and F1 are
/// macro averages over negative/neutral/positive; the JSON form also carries
/// the confusion matrix and the failure count.
inline std::string format_eval(const EvalReport& r, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out;
    csv::append_row(out, {"Model", "Accuracy", "Recall", "F1-Score"});
    csv::append_row(out, {r.model_name, fixed6(r.accuracy), fixed6(r.macro_recall),
                          fixed6(r.macro_f1)});
    return out;
  }
  std::string matrix = "[";
  for (std::size_t g = 0; g < 3; ++g) {
    const auto& row = r.matrix.counts()[g];
    matrix += fmt::format("{}[{}, {}, {}]", g ? ", " : "", row[0], row[1], row[2]);
  }
  matrix += "]";
  return fmt::format(
      "{{\n  \"averaging\": \"macro\",\n"
      "  \"classes\": [\"negative\", \"neutral\", \"positive\"],\n"
      "  \"columns\": [\"Model\", \"Accuracy\", \"Recall\", \"F1-Score\"],\n"
      "  \"rows\": [\n"
      "    {{\"Model\": {}, \"Accuracy\": {}, \"Recall\": {}, \"F1-Score\": {}, "
      "\"n_failed\": {}, \"confusion_matrix\": {}}}\n"
      "  ]\n}}\n",
      detail::json_str(r.model_name), fixed6(r.accuracy), fixed6(r.macro_recall),
      fixed6(r.macro_f1), r.n_failed, matrix);
}

inline std::filesystem::path emit_eval_report(const EvalReport& report, ReportFormat format,
                                              const std::filesystem::path& dir) {
  ensure_directory(dir);
  const auto path = report_path(dir, kEvalReport, format);
  csv::write_file(path, format_eval(report, format));
  return path;
}

}  // namespace sem
