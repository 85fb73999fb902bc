#pragma once

// Inference backends (Ollama-style HTTP endpoint, lexicon) and the bounded
// parallel batch classifier.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "httplib.h"
#include "sem/error.hpp"
#include "sem/sentiment.hpp"

namespace sem {

enum class BackendKind { http_llm, lexicon };

inline const char* to_string(BackendKind kind) {
  return kind == BackendKind::http_llm ? "http" : "lexicon";
}

struct BackendConfig {
  BackendKind kind = BackendKind::lexicon;
  std::string endpoint_url;            // http only
  std::string model_name;              // http only
  std::filesystem::path lexicon_path;  // lexicon only
  std::size_t max_parallel_requests = 4;
  std::size_t max_retries = 2;
  std::chrono::milliseconds request_timeout{30000};
  std::chrono::milliseconds retry_base_delay{250};
};

/// A classifier usable concurrently from several worker threads.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;
  /// Identifies the model for cache keys and reports.
  virtual std::string model() const = 0;
  /// Throws BackendError on permanent failure.
  virtual SentimentResult classify(std::string_view text) const = 0;
};

// 64-bit FNV-1a, stable across platforms; used for cache keys.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
  return fmt::format("{:016x}", fnv1a64(data));
}

class LexiconBackend final : public Backend {
 public:
  explicit LexiconBackend(Lexicon lexicon) : lexicon_(std::move(lexicon)) {
    if (lexicon_.empty()) throw Error(Errc::config_error, "lexicon is empty", "lexicon_path");
    std::string canonical;
    for (const auto& [word, polarity] : lexicon_) {
      canonical += word;
      canonical += polarity == LexiconPolarity::positive ? ",+\n" : ",-\n";
    }
    model_ = "lexicon-" + fnv1a64_hex(canonical);
  }

  BackendKind kind() const override { return BackendKind::lexicon; }
  std::string model() const override { return model_; }
  SentimentResult classify(std::string_view text) const override {
    return lexicon_classify(text, lexicon_);
  }

 private:
  Lexicon lexicon_;
  std::string model_;
};

// ---------------------------------------------------------------------------
// HTTP backend

struct Endpoint {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // without trailing slash
};

inline Endpoint split_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http") {
    throw Error(Errc::config_error, "endpoint_url must be an http:// URL, got '" +
                                        std::string(url) + "'",
                "endpoint_url");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = std::string(url.substr(0, path_begin));
  if (path_begin != std::string_view::npos) ep.path_prefix = std::string(url.substr(path_begin));
  while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  if (ep.origin.size() <= scheme_end + 3) {
    throw Error(Errc::config_error, "endpoint_url has no host", "endpoint_url");
  }
  return ep;
}

/// Ollama-style `/api/generate` request body, non-streaming, temperature 0.
inline nlohmann::json generate_request(std::string_view model, std::string_view prompt) {
  return nlohmann::json{{"model", model},
                        {"prompt", prompt},
                        {"stream", false},
                        {"options", {{"temperature", 0}}}};
}

/// Delay before retry number `retry` (0-based): base * 2^retry, jittered by
/// a factor drawn from [0.8, 1.2].
inline std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, std::size_t retry,
                                               double jitter) {
  const double scaled = static_cast<double>(base.count()) *
                        static_cast<double>(std::uint64_t{1} << std::min<std::size_t>(retry, 20)) *
                        jitter;
  return std::chrono::milliseconds(static_cast<std::int64_t>(scaled));
}

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config)
      : config_(std::move(config)), endpoint_(split_endpoint(config_.endpoint_url)) {
    if (config_.model_name.empty()) {
      throw Error(Errc::config_error, "model_name is required for the http backend",
                  "model_name");
    }
  }

  BackendKind kind() const override { return BackendKind::http_llm; }
  std::string model() const override { return config_.model_name; }

  /// One POST per attempt. Transport failures (connection errors, timeouts,
  /// 5xx/408/429) are retried up to max_retries; an unparseable or
  /// unknown-label completion is retried at most once within that budget.
  SentimentResult classify(std::string_view text) const override {
    const std::string body = generate_request(config_.model_name, build_prompt(text)).dump();
    std::size_t attempts = 0;
    std::size_t retries = 0;
    bool retried_parse = false;
    while (true) {
      ++attempts;
      Attempt a = post(body);
      if (a.result) return *a.result;

      const bool parse_failure =
          a.code == Errc::unparseable_response || a.code == Errc::unknown_label;
      const bool may_retry = retries < config_.max_retries && a.retryable &&
                             (!parse_failure || !retried_parse);
      if (!may_retry) {
        throw BackendError(a.code,
                           a.message + " (after " + std::to_string(attempts) + " attempt" +
                               (attempts == 1 ? "" : "s") + ")",
                           attempts, a.raw);
      }
      if (parse_failure) retried_parse = true;
      std::this_thread::sleep_for(backoff_delay(config_.retry_base_delay, retries, jitter()));
      ++retries;
    }
  }

  std::uint64_t requests_sent() const { return requests_.load(); }

 private:
  struct Attempt {
    std::optional<SentimentResult> result;
    Errc code = Errc::backend_unavailable;
    std::string message;
    std::string raw;
    bool retryable = true;
  };

  Attempt post(const std::string& body) const {
    ++requests_;
    httplib::Client client(endpoint_.origin);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        config_.request_timeout);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    Attempt a;
    auto res = client.Post(endpoint_.path_prefix + "/api/generate", body, "application/json");
    if (!res) {
      a.message = "request to " + endpoint_.origin + " failed: " + httplib::to_string(res.error());
      return a;
    }
    if (res->status != 200) {
      a.message = "endpoint returned HTTP " + std::to_string(res->status);
      a.raw = res->body;
      a.retryable = res->status >= 500 || res->status == 408 || res->status == 429;
      return a;
    }
    const auto envelope = nlohmann::json::parse(res->body, nullptr, false);
    if (envelope.is_discarded() || !envelope.is_object() || !envelope.contains("response") ||
        !envelope["response"].is_string()) {
      a.code = Errc::unparseable_response;
      a.message = "endpoint body has no string 'response' field";
      a.raw = res->body;
      return a;
    }
    const std::string& completion = envelope["response"].get_ref<const std::string&>();
    try {
      a.result = parse_model_response(completion);
    } catch (const BackendError& e) {
      a.code = e.code();
      a.message = e.what();
      a.raw = completion;
    }
    return a;
  }

  static double jitter() {
    thread_local std::mt19937 rng{std::random_device{}()};
    return std::uniform_real_distribution<double>(0.8, 1.2)(rng);
  }

  BackendConfig config_;
  Endpoint endpoint_;
  mutable std::atomic<std::uint64_t> requests_{0};
};

inline std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.max_parallel_requests < 1) {
    throw Error(Errc::config_error, "max_parallel_requests must be >= 1",
                "max_parallel_requests");
  }
  if (config.kind == BackendKind::http_llm) return std::make_unique<HttpBackend>(config);
  if (config.lexicon_path.empty()) {
    throw Error(Errc::config_error, "lexicon_path is required for the lexicon backend",
                "lexicon_path");
  }
  return std::make_unique<LexiconBackend>(load_lexicon(config.lexicon_path));
}

// ---------------------------------------------------------------------------
// Batch classification

struct BatchItem {
  std::string id;
  std::string text;
};

struct FailureRecord {
  std::string reason;
  std::size_t attempts = 0;

  friend bool operator==(const FailureRecord&, const FailureRecord&) = default;
};

struct ClassificationOutcome {
  std::string comment_id;
  std::variant<SentimentResult, FailureRecord> result;

  bool ok() const { return std::holds_alternative<SentimentResult>(result); }
  const SentimentResult& sentiment() const { return std::get<SentimentResult>(result); }
  const FailureRecord& failure() const { return std::get<FailureRecord>(result); }

  friend bool operator==(const ClassificationOutcome&, const ClassificationOutcome&) = default;
};

struct BatchSummary {
  std::size_t classified = 0;
  std::size_t failed = 0;
};

struct BatchResult {
  std::vector<ClassificationOutcome> outcomes;  // same order as the input
  BatchSummary summary;
};

/// Classifies every item with at most `max_parallel` calls in flight.
/// Per-item failures become FailureRecords; the batch never aborts.
inline BatchResult classify_batch(std::span<const BatchItem> items, const Backend& backend,
                                  std::size_t max_parallel) {
  if (max_parallel < 1) throw std::invalid_argument("classify_batch: max_parallel must be >= 1");

  BatchResult out;
  out.outcomes.resize(items.size());
  auto run_one = [&](std::size_t k) {
    ClassificationOutcome& slot = out.outcomes[k];
    slot.comment_id = items[k].id;
    try {
      slot.result = backend.classify(items[k].text);
    } catch (const BackendError& e) {
      slot.result = FailureRecord{e.what(), e.attempts()};
    } catch (const std::exception& e) {
      slot.result = FailureRecord{e.what(), 1};
    }
  };

  const std::size_t workers = std::min(max_parallel, items.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < items.size(); ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < items.size(); k = next++) run_one(k);
      });
    }
  }

  for (const auto& o : out.outcomes) ++(o.ok() ? out.summary.classified : out.summary.failed);
  return out;
}

}  // namespace sem
