#pragma once

// Pipeline configuration: a JSON document whose relative paths resolve
// against the directory holding the config file.
//
//   {
//     "dataset_dir": "data",
//     "backend": {
//       "backend_kind": "lexicon" | "http",
//       "lexicon_path": "lexicon.csv",           // lexicon
//       "endpoint_url": "http://localhost:11434", // http
//       "model_name": "gemma2:9b",                // http
//       "max_parallel_requests": 4,
//       "max_retries": 2,
//       "request_timeout_ms": 30000,
//       "retry_base_delay_ms": 250
//     },
//     "normalization_cohort": "global" | "per_playlist",
//     "output_dir": "sem_output",
//     "cache_classifications": true,
//     "format": "csv" | "json",
//     "eval_file": "labeled.csv"
//   }

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sem/backend.hpp"
#include "sem/csv.hpp"
#include "sem/engagement.hpp"
#include "sem/error.hpp"

namespace sem {

enum class ReportFormat { csv, json };

inline const char* to_string(ReportFormat f) { return f == ReportFormat::csv ? "csv" : "json"; }

struct PipelineConfig {
  std::filesystem::path dataset_dir;
  BackendConfig backend;
  Cohort normalization_cohort = Cohort::global;
  std::filesystem::path output_dir = "sem_output";
  bool cache_classifications = true;
  ReportFormat format = ReportFormat::csv;
  std::filesystem::path eval_file;
};

[[noreturn]] inline void config_error(std::string_view field, const std::string& reason) {
  throw Error(Errc::config_error, std::string(field) + ": " + reason, std::string(field));
}

inline BackendKind parse_backend_kind(std::string_view value) {
  if (value == "http" || value == "http_llm") return BackendKind::http_llm;
  if (value == "lexicon") return BackendKind::lexicon;
  config_error("backend_kind", "expected 'http' or 'lexicon', got '" + std::string(value) + "'");
}

inline Cohort parse_cohort(std::string_view value) {
  if (value == "global") return Cohort::global;
  if (value == "per_playlist") return Cohort::per_playlist;
  config_error("normalization_cohort",
               "expected 'global' or 'per_playlist', got '" + std::string(value) + "'");
}

inline ReportFormat parse_format(std::string_view value) {
  if (value == "csv") return ReportFormat::csv;
  if (value == "json") return ReportFormat::json;
  config_error("format", "expected 'csv' or 'json', got '" + std::string(value) + "'");
}

namespace detail {

inline const std::string& config_string(const nlohmann::json& obj, std::string_view field) {
  const auto& v = obj.at(std::string(field));
  if (!v.is_string()) config_error(field, "expected a string");
  return v.get_ref<const std::string&>();
}

inline std::uint64_t config_count(const nlohmann::json& obj, std::string_view field) {
  const auto& v = obj.at(std::string(field));
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
    config_error(field, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::filesystem::path config_path(const nlohmann::json& obj, std::string_view field,
                                         const std::filesystem::path& base) {
  std::filesystem::path p = config_string(obj, field);
  if (p.empty()) config_error(field, "empty path");
  return p.is_absolute() ? p : base / p;
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      config_error(key, "unknown field");
    }
  }
}

}  // namespace detail

/// Checks cross-field rules of a backend configuration.
inline void validate_backend_config(const BackendConfig& b) {
  if (b.max_parallel_requests < 1) config_error("max_parallel_requests", "must be >= 1");
  if (b.request_timeout.count() <= 0) config_error("request_timeout_ms", "must be > 0");
  if (b.kind == BackendKind::http_llm) {
    if (b.endpoint_url.empty()) config_error("endpoint_url", "required for the http backend");
    if (b.model_name.empty()) config_error("model_name", "required for the http backend");
    split_endpoint(b.endpoint_url);
  } else if (b.lexicon_path.empty()) {
    config_error("lexicon_path", "required for the lexicon backend");
  }
}

inline PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base) {
  using detail::config_count;
  using detail::config_path;
  using detail::config_string;
  if (!doc.is_object()) config_error("config", "top level must be an object");
  detail::reject_unknown(doc, {"dataset_dir", "backend", "normalization_cohort", "output_dir",
                               "cache_classifications", "format", "eval_file"});

  PipelineConfig cfg;
  cfg.output_dir = base / cfg.output_dir;
  if (doc.contains("dataset_dir")) cfg.dataset_dir = config_path(doc, "dataset_dir", base);
  if (doc.contains("output_dir")) cfg.output_dir = config_path(doc, "output_dir", base);
  if (doc.contains("eval_file")) cfg.eval_file = config_path(doc, "eval_file", base);
  if (doc.contains("normalization_cohort")) {
    cfg.normalization_cohort = parse_cohort(config_string(doc, "normalization_cohort"));
  }
  if (doc.contains("format")) cfg.format = parse_format(config_string(doc, "format"));
  if (doc.contains("cache_classifications")) {
    const auto& v = doc["cache_classifications"];
    if (!v.is_boolean()) config_error("cache_classifications", "expected true or false");
    cfg.cache_classifications = v.get<bool>();
  }

  if (!doc.contains("backend")) config_error("backend", "missing");
  const auto& b = doc["backend"];
  if (!b.is_object()) config_error("backend", "expected an object");
  detail::reject_unknown(b, {"backend_kind", "endpoint_url", "model_name", "lexicon_path",
                             "max_parallel_requests", "max_retries", "request_timeout_ms",
                             "retry_base_delay_ms"});
  if (!b.contains("backend_kind")) config_error("backend_kind", "missing");
  BackendConfig& bc = cfg.backend;
  bc.kind = parse_backend_kind(config_string(b, "backend_kind"));
  if (b.contains("endpoint_url")) bc.endpoint_url = config_string(b, "endpoint_url");
  if (b.contains("model_name")) bc.model_name = config_string(b, "model_name");
  if (b.contains("lexicon_path")) bc.lexicon_path = config_path(b, "lexicon_path", base);
  if (b.contains("max_parallel_requests")) {
    bc.max_parallel_requests = config_count(b, "max_parallel_requests");
  }
  if (b.contains("max_retries")) bc.max_retries = config_count(b, "max_retries");
  if (b.contains("request_timeout_ms")) {
    bc.request_timeout = std::chrono::milliseconds(config_count(b, "request_timeout_ms"));
  }
  if (b.contains("retry_base_delay_ms")) {
    bc.retry_base_delay = std::chrono::milliseconds(config_count(b, "retry_base_delay_ms"));
  }
  validate_backend_config(bc);
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const Error& e) {
    config_error("config", "cannot read " + path.string());
  }
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) config_error("config", "not valid JSON: " + path.string());
  return parse_config(doc, path.parent_path());
}

}  // namespace sem
