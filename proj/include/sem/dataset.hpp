#pragma once

// Playlist / video / comment tables, their CSV encoding, and the validated
// in-memory Dataset that joins them.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sem/csv.hpp"
#include "sem/error.hpp"
#include "sem/timestamp.hpp"
#include "sem/unicode.hpp"

namespace sem {

enum class EntityKind { playlist, video, comment };

inline const char* to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::playlist: return "playlist";
    case EntityKind::video: return "video";
    case EntityKind::comment: return "comment";
  }
  return "entity";
}

namespace detail {

// Field access for one data row, keyed by column name.
class RowReader {
 public:
  RowReader(const csv::Record& record, const std::map<std::string, std::size_t, std::less<>>& columns)
      : record_(record), columns_(columns) {}

  [[noreturn]] void fail(const std::string& reason) const {
    throw Error(Errc::malformed_row, "row " + std::to_string(record_.line) + ": " + reason,
                std::to_string(record_.line));
  }

  const std::string& text(std::string_view column) const {
    return record_.fields[columns_.find(column)->second];
  }

  std::string key(std::string_view column) const {
    const std::string& value = text(column);
    if (value.empty()) fail(std::string("empty ") + std::string(column));
    return value;
  }

  std::uint64_t count(std::string_view column) const {
    const std::string& value = text(column);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
      fail(std::string(column) + " is not a non-negative integer: '" + value + "'");
    }
    return out;
  }

  std::optional<Timestamp> optional_timestamp(std::string_view column) const {
    const std::string& value = text(column);
    if (value.empty()) return std::nullopt;
    auto parsed = parse_rfc3339(value);
    if (!parsed) fail(std::string(column) + " is not an RFC 3339 timestamp: '" + value + "'");
    return parsed;
  }

  Timestamp timestamp(std::string_view column) const {
    auto parsed = optional_timestamp(column);
    if (!parsed) fail(std::string("empty ") + std::string(column));
    return *parsed;
  }

 private:
  const csv::Record& record_;
  const std::map<std::string, std::size_t, std::less<>>& columns_;
};

}  // namespace detail

struct Playlist {
  static constexpr EntityKind kind = EntityKind::playlist;
  static constexpr std::array<std::string_view, 3> columns{"playlist_id", "channel_id", "title"};

  std::string playlist_id;
  std::string channel_id;
  std::string title;

  const std::string& id() const { return playlist_id; }

  static Playlist from_row(const detail::RowReader& row) {
    Playlist p{row.key("playlist_id"), row.text("channel_id"), row.text("title")};
    if (unicode::trim(p.title).empty()) row.fail("empty title");
    return p;
  }
  std::vector<std::string> to_row() const { return {playlist_id, channel_id, title}; }

  friend bool operator==(const Playlist&, const Playlist&) = default;
};

struct Video {
  static constexpr EntityKind kind = EntityKind::video;
  static constexpr std::array<std::string_view, 7> columns{
      "video_id", "playlist_id", "title", "views", "likes", "duration_seconds", "published_at"};

  std::string video_id;
  std::string playlist_id;
  std::string title;
  std::uint64_t views = 0;
  std::uint64_t likes = 0;
  std::uint64_t duration_seconds = 0;
  Timestamp published_at{};

  const std::string& id() const { return video_id; }

  static Video from_row(const detail::RowReader& row) {
    return Video{row.key("video_id"),         row.key("playlist_id"), row.text("title"),
                 row.count("views"),          row.count("likes"),     row.count("duration_seconds"),
                 row.timestamp("published_at")};
  }
  std::vector<std::string> to_row() const {
    return {video_id,
            playlist_id,
            title,
            std::to_string(views),
            std::to_string(likes),
            std::to_string(duration_seconds),
            format_rfc3339(published_at)};
  }

  friend bool operator==(const Video&, const Video&) = default;
};

struct Comment {
  static constexpr EntityKind kind = EntityKind::comment;
  static constexpr std::array<std::string_view, 4> columns{"comment_id", "video_id", "text",
                                                           "published_at"};

  std::string comment_id;
  std::string video_id;
  std::string text;
  std::optional<Timestamp> published_at;

  const std::string& id() const { return comment_id; }

  static Comment from_row(const detail::RowReader& row) {
    Comment c{row.key("comment_id"), row.key("video_id"), row.text("text"),
              row.optional_timestamp("published_at")};
    if (unicode::trim(c.text).empty()) row.fail("empty text");
    return c;
  }
  std::vector<std::string> to_row() const {
    return {comment_id, video_id, text, published_at ? format_rfc3339(*published_at) : ""};
  }

  friend bool operator==(const Comment&, const Comment&) = default;
};

template <class T>
concept Entity = requires(const T& e, const detail::RowReader& row) {
  { T::kind } -> std::convertible_to<EntityKind>;
  T::columns;
  { T::from_row(row) } -> std::same_as<T>;
  { e.to_row() } -> std::same_as<std::vector<std::string>>;
};

/// Parses one table from CSV text. Columns may appear in any order but the
/// header must name exactly the declared column set.
template <Entity T>
std::vector<T> parse_table(std::string_view contents) {
  if (auto bad = unicode::first_invalid_utf8(contents)) {
    throw Error(Errc::non_utf8_input,
                std::string(to_string(T::kind)) + " table has invalid UTF-8 at byte " +
                    std::to_string(*bad),
                std::to_string(*bad));
  }
  const auto records = csv::parse(contents);
  if (records.empty()) {
    throw Error(Errc::missing_column, std::string("missing header row, expected column '") +
                                          std::string(T::columns[0]) + "'",
                std::string(T::columns[0]));
  }

  const csv::Record& header = records.front();
  std::map<std::string, std::size_t, std::less<>> columns;
  for (std::size_t k = 0; k < header.fields.size(); ++k) {
    const std::string& name = header.fields[k];
    if (std::find(T::columns.begin(), T::columns.end(), name) == T::columns.end()) {
      throw Error(Errc::malformed_row, "row " + std::to_string(header.line) +
                                           ": unexpected column '" + name + "'",
                  std::to_string(header.line));
    }
    if (!columns.emplace(name, k).second) {
      throw Error(Errc::malformed_row, "row " + std::to_string(header.line) +
                                           ": duplicate column '" + name + "'",
                  std::to_string(header.line));
    }
  }
  for (std::string_view required : T::columns) {
    if (!columns.contains(required)) {
      throw Error(Errc::missing_column, "missing column '" + std::string(required) + "'",
                  std::string(required));
    }
  }

  std::vector<T> out;
  out.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const csv::Record& record = records[r];
    detail::RowReader row(record, columns);
    if (record.fields.size() != header.fields.size()) {
      row.fail("expected " + std::to_string(header.fields.size()) + " fields, got " +
               std::to_string(record.fields.size()));
    }
    out.push_back(T::from_row(row));
  }
  return out;
}

template <Entity T>
std::vector<T> load_table(const std::filesystem::path& path) {
  return parse_table<T>(std::string_view(csv::read_file(path)));
}

/// Serializes a table with its canonical header and LF line endings.
template <Entity T>
std::string format_table(std::span<const T> rows) {
  std::string out;
  std::vector<std::string> header(T::columns.begin(), T::columns.end());
  csv::append_row(out, header);
  for (const T& row : rows) csv::append_row(out, row.to_row());
  return out;
}

/// Validated, immutable join of the three tables. Flat tables keep source
/// order; index maps point into them.
class Dataset {
 public:
  using Index = std::map<std::string, std::vector<std::size_t>, std::less<>>;

  const std::vector<Playlist>& playlists() const { return playlists_; }
  const std::vector<Video>& videos() const { return videos_; }
  const std::vector<Comment>& comments() const { return comments_; }

  const Playlist* find_playlist(std::string_view id) const {
    auto it = playlist_pos_.find(id);
    return it == playlist_pos_.end() ? nullptr : &playlists_[it->second];
  }
  const Video* find_video(std::string_view id) const {
    auto it = video_pos_.find(id);
    return it == video_pos_.end() ? nullptr : &videos_[it->second];
  }

  /// Positions in videos() of the members of a playlist, in file order.
  std::span<const std::size_t> videos_of(std::string_view playlist_id) const {
    auto it = videos_by_playlist_.find(playlist_id);
    if (it == videos_by_playlist_.end()) return {};
    return it->second;
  }
  /// Positions in comments() of the comments on a video, in file order.
  std::span<const std::size_t> comments_of(std::string_view video_id) const {
    auto it = comments_by_video_.find(video_id);
    if (it == comments_by_video_.end()) return {};
    return it->second;
  }
  std::size_t comment_count(std::string_view video_id) const {
    return comments_of(video_id).size();
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.playlists_ == b.playlists_ && a.videos_ == b.videos_ && a.comments_ == b.comments_;
  }

  friend Dataset validate_dataset(std::vector<Playlist>, std::vector<Video>, std::vector<Comment>);

 private:
  std::vector<Playlist> playlists_;
  std::vector<Video> videos_;
  std::vector<Comment> comments_;
  std::map<std::string, std::size_t, std::less<>> playlist_pos_;
  std::map<std::string, std::size_t, std::less<>> video_pos_;
  Index videos_by_playlist_;
  Index comments_by_video_;
};

namespace detail {

template <Entity T>
std::map<std::string, std::size_t, std::less<>> unique_positions(const std::vector<T>& rows) {
  std::map<std::string, std::size_t, std::less<>> pos;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!pos.emplace(rows[k].id(), k).second) {
      throw Error(Errc::duplicate_key,
                  std::string("duplicate ") + to_string(T::kind) + " id '" + rows[k].id() + "'",
                  rows[k].id());
    }
  }
  return pos;
}

[[noreturn]] inline void dangling(EntityKind child, const std::string& id, EntityKind parent,
                                  const std::string& missing) {
  throw Error(Errc::dangling_foreign_key, std::string(to_string(child)) + " '" + id +
                                              "' references missing " + to_string(parent) +
                                              " '" + missing + "'",
              missing);
}

}  // namespace detail

/// Rejects duplicate keys and dangling foreign keys, then builds the indexes.
inline Dataset validate_dataset(std::vector<Playlist> playlists, std::vector<Video> videos,
                                std::vector<Comment> comments) {
  Dataset ds;
  ds.playlist_pos_ = detail::unique_positions(playlists);
  ds.video_pos_ = detail::unique_positions(videos);
  detail::unique_positions(comments);

  for (std::size_t k = 0; k < videos.size(); ++k) {
    const Video& v = videos[k];
    if (!ds.playlist_pos_.contains(v.playlist_id)) {
      detail::dangling(EntityKind::video, v.video_id, EntityKind::playlist, v.playlist_id);
    }
    ds.videos_by_playlist_[v.playlist_id].push_back(k);
  }
  for (std::size_t k = 0; k < comments.size(); ++k) {
    const Comment& c = comments[k];
    if (!ds.video_pos_.contains(c.video_id)) {
      detail::dangling(EntityKind::comment, c.comment_id, EntityKind::video, c.video_id);
    }
    ds.comments_by_video_[c.video_id].push_back(k);
  }
  ds.playlists_ = std::move(playlists);
  ds.videos_ = std::move(videos);
  ds.comments_ = std::move(comments);
  return ds;
}

inline constexpr std::string_view kPlaylistsFile = "playlists.csv";
inline constexpr std::string_view kVideosFile = "videos.csv";
inline constexpr std::string_view kCommentsFile = "comments.csv";

/// Loads `playlists.csv`, `videos.csv` and `comments.csv` from a directory.
inline Dataset load_dataset(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(Errc::missing_file, "dataset directory not found: " + dir.string(),
                dir.string());
  }
  for (std::string_view name : {kPlaylistsFile, kVideosFile, kCommentsFile}) {
    if (!std::filesystem::is_regular_file(dir / name, ec)) {
      const std::string stem(name.substr(0, name.find('.')));
      throw Error(Errc::missing_file, "missing " + std::string(name) + " in " + dir.string(),
                  stem);
    }
  }
  return validate_dataset(load_table<Playlist>(dir / kPlaylistsFile),
                          load_table<Video>(dir / kVideosFile),
                          load_table<Comment>(dir / kCommentsFile));
}

/// Writes the three tables back out in canonical form.
inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  csv::write_file(dir / kPlaylistsFile, format_table(std::span(ds.playlists())));
  csv::write_file(dir / kVideosFile, format_table(std::span(ds.videos())));
  csv::write_file(dir / kCommentsFile, format_table(std::span(ds.comments())));
}

}  // namespace sem
