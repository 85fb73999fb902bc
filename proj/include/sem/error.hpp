#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sem {

enum class Errc {
  missing_column,
  malformed_row,
  non_utf8_input,
  duplicate_key,
  dangling_foreign_key,
  missing_file,
  unparseable_response,
  unknown_label,
  backend_unavailable,
  empty_playlist,
  empty_cohort,
  empty_matrix,
  config_error,
  io_error,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::missing_column: return "MissingColumn";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::non_utf8_input: return "NonUtf8Input";
    case Errc::duplicate_key: return "DuplicateKey";
    case Errc::dangling_foreign_key: return "DanglingForeignKey";
    case Errc::missing_file: return "MissingFile";
    case Errc::unparseable_response: return "UnparseableResponse";
    case Errc::unknown_label: return "UnknownLabel";
    case Errc::backend_unavailable: return "BackendUnavailable";
    case Errc::empty_playlist: return "EmptyPlaylist";
    case Errc::empty_cohort: return "EmptyCohort";
    case Errc::empty_matrix: return "EmptyMatrix";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Error";
}

// Process exit codes used by the command-line tool.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, backend = 3 };

inline ExitCode exit_code_for(Errc code) {
  switch (code) {
    case Errc::config_error:
      return ExitCode::usage;
    case Errc::unparseable_response:
    case Errc::unknown_label:
    case Errc::backend_unavailable:
      return ExitCode::backend;
    default:
      return ExitCode::data;
  }
}

// Base error for every recoverable failure raised by the library.
// `subject()` carries the offending value (column name, key, label, ...).
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::string subject = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        subject_(std::move(subject)) {}

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

  // Same error, message prefixed with the pipeline stage that raised it.
  Error in_stage(const std::string& stage) const {
    Error copy = *this;
    static_cast<std::runtime_error&>(copy) =
        std::runtime_error("[" + stage + "] " + what());
    return copy;
  }

 private:
  Errc code_;
  std::string subject_;
};

// Raised by inference backends; remembers how many requests were spent and
// the last raw model output, if any.
class BackendError : public Error {
 public:
  BackendError(Errc code, std::string message, std::size_t attempts,
               std::string raw = {})
      : Error(code, std::move(message)), attempts_(attempts), raw_(std::move(raw)) {}

  std::size_t attempts() const noexcept { return attempts_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::size_t attempts_;
  std::string raw_;
};

}  // namespace sem
