#pragma once

// UTF-8 validation, letter-run tokenization and default case folding.
// Backed by ICU's character property tables so Arabic and Latin scripts
// tokenize under the same rule.

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sem::unicode {

namespace detail {

inline void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

inline int32_t checked_length(std::string_view s) {
  if (s.size() > static_cast<std::size_t>(std::numeric_limits<int32_t>::max())) {
    throw std::length_error("text too large for UTF-8 scan");
  }
  return static_cast<int32_t>(s.size());
}

}  // namespace detail

/// Byte offset of the first ill-formed sequence, or nullopt if `s` is valid UTF-8.
inline std::optional<std::size_t> first_invalid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t n = detail::checked_length(s);
  int32_t i = 0;
  while (i < n) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(p, i, n, c);
    if (c < 0) return static_cast<std::size_t>(start);
  }
  return std::nullopt;
}

inline bool is_valid_utf8(std::string_view s) { return !first_invalid_utf8(s); }

inline bool is_letter(UChar32 c) { return u_isalpha(c) != 0; }

/// Simple default case folding, code point by code point.
inline std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t n = detail::checked_length(s);
  int32_t i = 0;
  while (i < n) {
    UChar32 c = 0;
    U8_NEXT(p, i, n, c);
    if (c < 0) c = 0xFFFD;
    detail::append_utf8(out, u_foldCase(c, U_FOLD_CASE_DEFAULT));
  }
  return out;
}

/// Splits on every non-letter code point and case-folds each token.
/// Ill-formed bytes act as separators.
inline std::vector<std::string> letter_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t n = detail::checked_length(s);
  int32_t i = 0;
  while (i < n) {
    UChar32 c = 0;
    U8_NEXT(p, i, n, c);
    if (c >= 0 && is_letter(c)) {
      detail::append_utf8(current, u_foldCase(c, U_FOLD_CASE_DEFAULT));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// True if every code point of `s` is a letter (and `s` is non-empty).
inline bool is_single_word(std::string_view s) {
  if (s.empty()) return false;
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t n = detail::checked_length(s);
  int32_t i = 0;
  while (i < n) {
    UChar32 c = 0;
    U8_NEXT(p, i, n, c);
    if (c < 0 || !is_letter(c)) return false;
  }
  return true;
}

/// Strips ASCII and Unicode white space from both ends.
inline std::string_view trim(std::string_view s) {
  auto is_space_at = [&](std::size_t pos, bool forward, std::size_t& width) {
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const int32_t n = static_cast<int32_t>(s.size());
    UChar32 c = 0;
    if (forward) {
      int32_t i = static_cast<int32_t>(pos);
      U8_NEXT(p, i, n, c);
      width = static_cast<std::size_t>(i) - pos;
    } else {
      int32_t i = static_cast<int32_t>(pos);
      U8_PREV(p, 0, i, c);
      width = pos - static_cast<std::size_t>(i);
    }
    return c >= 0 && u_isUWhiteSpace(c);
  };
  std::size_t begin = 0;
  std::size_t end = s.size();
  std::size_t width = 0;
  while (begin < end && is_space_at(begin, true, width)) begin += width;
  while (end > begin && is_space_at(end, false, width)) end -= width;
  return s.substr(begin, end - begin);
}

}  // namespace sem::unicode
