#pragma once

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// LF or CRLF line endings on input, LF on output.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sem/error.hpp"

namespace sem::csv {

struct Record {
  std::size_t line = 0;  // physical line on which the record starts (1-based)
  std::vector<std::string> fields;
};

/// Parses a whole document. Blank lines are skipped; a leading UTF-8 BOM is
/// ignored. Throws Error(malformed_row) on quoting errors.
inline std::vector<Record> parse(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  bool field_started = false;  // any char (or quote) seen for this record
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto malformed = [&](std::size_t at_line, const std::string& why) {
    return Error(Errc::malformed_row, "row " + std::to_string(at_line) + ": " + why,
                 std::to_string(at_line));
  };
  auto end_record = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty() &&
                       !field_started;
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    field_started = false;
  };
  auto consume_newline = [&]() -> bool {
    if (text[i] == '\n') {
      ++i;
      ++line;
      return true;
    }
    if (text[i] == '\r') {
      ++i;
      if (i < n && text[i] == '\n') ++i;
      ++line;
      return true;
    }
    return false;
  };

  while (i < n) {
    if (current.fields.empty() && field.empty() && !field_started) current.line = line;
    const char c = text[i];
    if (c == '"' && field.empty()) {
      const std::size_t open_line = line;
      field_started = true;
      ++i;
      bool closed = false;
      while (i < n) {
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (text[i] == '\n') ++line;
        field.push_back(text[i]);
        ++i;
      }
      if (!closed) throw malformed(open_line, "unterminated quoted field");
      if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw malformed(open_line, "unexpected character after closing quote");
      }
      continue;
    }
    if (c == ',') {
      field_started = true;
      current.fields.push_back(std::move(field));
      field.clear();
      ++i;
      continue;
    }
    if (c == '\n' || c == '\r') {
      consume_newline();
      end_record();
      continue;
    }
    if (c == '"') throw malformed(line, "stray quote inside unquoted field");
    field_started = true;
    field.push_back(c);
    ++i;
  }
  if (field_started || !field.empty() || !current.fields.empty()) end_record();
  return records;
}

inline bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void append_field(std::string& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

inline void append_row(std::string& out, std::span<const std::string> fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out.push_back(',');
    append_field(out, fields[k]);
  }
  out.push_back('\n');
}

inline void append_row(std::string& out, std::initializer_list<std::string> fields) {
  append_row(out, std::span<const std::string>(fields.begin(), fields.size()));
}

/// Reads a file into memory; a missing file raises Error(missing_file).
inline std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::missing_file, "no such file: " + path.string(),
                path.filename().string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string(), path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes `contents` verbatim, creating parent directories as needed.
inline void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string(), path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string(), path.string());
}

}  // namespace sem::csv
