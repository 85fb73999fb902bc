#pragma once

// End-to-end run: load -> classify (with cache) -> polarity -> normalization
// -> engagement -> reports.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sem/backend.hpp"
#include "sem/config.hpp"
#include "sem/dataset.hpp"
#include "sem/engagement.hpp"
#include "sem/polarity.hpp"
#include "sem/report.hpp"

namespace sem {

inline constexpr std::string_view kCacheFile = "classifications.jsonl";

// ---------------------------------------------------------------------------
// Classification cache

/// Outcomes keyed by (comment_id, text hash, backend kind, model). Only
/// successful classifications are served back; failures are retried.
class ClassificationCache {
 public:
  struct Entry {
    std::string text_hash;
    std::string backend;
    std::string model;
    std::optional<SentimentResult> result;
  };

  static std::string text_hash(std::string_view text) { return "fnv1a64:" + fnv1a64_hex(text); }

  /// Reads a cache file; a missing file yields an empty cache and unreadable
  /// lines are skipped.
  static ClassificationCache load(const std::filesystem::path& path) {
    ClassificationCache cache;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return cache;
    std::istringstream in(csv::read_file(path));
    std::string line;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) continue;
      try {
        Entry e{j.at("text_hash").get<std::string>(), j.at("backend").get<std::string>(),
                j.at("model").get<std::string>(), std::nullopt};
        if (j.contains("label")) {
          const auto label = parse_label(j.at("label").get<std::string>());
          const double confidence = j.at("confidence").get<double>();
          if (!label || !(confidence >= 0.0 && confidence <= 1.0)) continue;
          e.result = SentimentResult{*label, confidence};
        }
        cache.entries_[j.at("comment_id").get<std::string>()] = std::move(e);
      } catch (const nlohmann::json::exception&) {
        continue;
      }
    }
    return cache;
  }

  std::optional<SentimentResult> lookup(const Comment& c, const Backend* backend) const {
    auto it = entries_.find(c.comment_id);
    if (it == entries_.end() || !it->second.result) return std::nullopt;
    const Entry& e = it->second;
    if (e.text_hash != text_hash(c.text)) return std::nullopt;
    if (backend && (e.backend != to_string(backend->kind()) || e.model != backend->model())) {
      return std::nullopt;
    }
    return e.result;
  }

  std::size_t size() const { return entries_.size(); }

  /// One JSON object per outcome, in dataset comment order.
  static std::string serialize(const Dataset& ds, std::span<const ClassificationOutcome> outcomes,
                               const Backend& backend) {
    std::string out;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      const ClassificationOutcome& o = outcomes[k];
      nlohmann::ordered_json j;
      j["comment_id"] = o.comment_id;
      j["text_hash"] = text_hash(ds.comments()[k].text);
      j["backend"] = to_string(backend.kind());
      j["model"] = backend.model();
      if (o.ok()) {
        j["label"] = to_string(o.sentiment().label);
        j["confidence"] = o.sentiment().confidence;
      } else {
        j["failure"] = {{"reason", o.failure().reason}, {"attempts", o.failure().attempts}};
      }
      out += j.dump();
      out += '\n';
    }
    return out;
  }

 private:
  std::map<std::string, Entry, std::less<>> entries_;
};

// ---------------------------------------------------------------------------
// Classification stage

struct ClassificationRun {
  std::vector<ClassificationOutcome> outcomes;  // aligned with Dataset::comments()
  BatchSummary summary;
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
};

namespace detail {

class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(const Backend& inner) : inner_(inner) {}
  BackendKind kind() const override { return inner_.kind(); }
  std::string model() const override { return inner_.model(); }
  SentimentResult classify(std::string_view text) const override {
    ++calls_;
    return inner_.classify(text);
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  const Backend& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace detail

/// Classifies every comment of the dataset, serving cache hits without
/// calling the backend. When `cache_path` is given, the cache is read before
/// and rewritten after the run.
inline ClassificationRun classify_dataset(const Dataset& ds, const Backend& backend,
                                          std::size_t max_parallel,
                                          const std::filesystem::path* cache_path = nullptr) {
  const auto& comments = ds.comments();
  ClassificationCache cache;
  if (cache_path) cache = ClassificationCache::load(*cache_path);

  ClassificationRun run;
  run.outcomes.resize(comments.size());
  std::vector<BatchItem> misses;
  std::vector<std::size_t> miss_pos;
  for (std::size_t k = 0; k < comments.size(); ++k) {
    run.outcomes[k].comment_id = comments[k].comment_id;
    if (auto hit = cache.lookup(comments[k], &backend)) {
      run.outcomes[k].result = *hit;
      ++run.cache_hits;
    } else {
      misses.push_back(BatchItem{comments[k].comment_id, comments[k].text});
      miss_pos.push_back(k);
    }
  }

  detail::CountingBackend counted(backend);
  BatchResult batch = classify_batch(misses, counted, max_parallel);
  for (std::size_t m = 0; m < misses.size(); ++m) {
    run.outcomes[miss_pos[m]] = std::move(batch.outcomes[m]);
  }
  run.backend_calls = counted.calls();
  for (const auto& o : run.outcomes) ++(o.ok() ? run.summary.classified : run.summary.failed);

  if (cache_path) {
    csv::write_file(*cache_path, ClassificationCache::serialize(ds, run.outcomes, backend));
  }
  return run;
}

/// Outcomes from a cache file alone; comments without a usable entry become
/// failures.
inline ClassificationRun outcomes_from_cache(const Dataset& ds,
                                             const std::filesystem::path& cache_path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(cache_path, ec)) {
    throw Error(Errc::missing_file, "no classification cache at " + cache_path.string(),
                std::string(kCacheFile));
  }
  const ClassificationCache cache = ClassificationCache::load(cache_path);
  ClassificationRun run;
  for (const Comment& c : ds.comments()) {
    ClassificationOutcome o{c.comment_id, FailureRecord{"not in classification cache", 0}};
    if (auto hit = cache.lookup(c, nullptr)) {
      o.result = *hit;
      ++run.cache_hits;
    }
    ++(o.ok() ? run.summary.classified : run.summary.failed);
    run.outcomes.push_back(std::move(o));
  }
  return run;
}

// ---------------------------------------------------------------------------
// Scoring stage

/// Polarity, normalization and engagement for every video and playlist.
/// Outcomes are matched to comments by comment_id; failed or missing
/// classifications are left out of the video mean.
inline EngagementReport score_dataset(const Dataset& ds,
                                      std::span<const ClassificationOutcome> outcomes,
                                      Cohort cohort) {
  std::map<std::string_view, const ClassificationOutcome*, std::less<>> by_comment;
  for (const auto& o : outcomes) by_comment.emplace(o.comment_id, &o);

  const auto& videos = ds.videos();
  std::vector<VideoPolarity> polarity;
  polarity.reserve(videos.size());
  for (const Video& v : videos) {
    std::vector<WeightedComment> weights;
    for (std::size_t ci : ds.comments_of(v.video_id)) {
      const Comment& c = ds.comments()[ci];
      auto it = by_comment.find(c.comment_id);
      if (it == by_comment.end() || !it->second->ok()) continue;
      weights.push_back(WeightedComment{c.comment_id, weighted_score(it->second->sentiment())});
    }
    polarity.push_back(video_polarity(v.video_id, weights));
  }

  // Cohort statistics, keyed by playlist id (empty key for the global cohort).
  std::map<std::string, std::pair<NormalizationStats, NormalizationStats>, std::less<>> stats;
  auto add_cohort = [&](const std::string& key, std::span<const std::size_t> members,
                        std::optional<std::string> id) {
    std::vector<std::uint64_t> views, likes;
    for (std::size_t k : members) {
      views.push_back(videos[k].views);
      likes.push_back(videos[k].likes);
    }
    stats.emplace(key, std::pair{cohort_stats(std::span<const std::uint64_t>(views), Feature::views,
                                              cohort, id),
                                 cohort_stats(std::span<const std::uint64_t>(likes), Feature::likes,
                                              cohort, id)});
  };
  if (cohort == Cohort::global) {
    if (!videos.empty()) {
      std::vector<std::size_t> all(videos.size());
      for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
      add_cohort("", all, std::nullopt);
    }
  } else {
    for (const Playlist& p : ds.playlists()) {
      if (!ds.videos_of(p.playlist_id).empty()) {
        add_cohort(p.playlist_id, ds.videos_of(p.playlist_id), p.playlist_id);
      }
    }
  }

  EngagementReport report;
  std::vector<std::size_t> order(videos.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(videos[a].playlist_id, videos[a].video_id) <
           std::tie(videos[b].playlist_id, videos[b].video_id);
  });

  std::map<std::string, std::vector<EngagementScore>, std::less<>> scores_by_playlist;
  std::map<std::string, std::vector<VideoPolarity>, std::less<>> polarity_by_playlist;
  for (std::size_t k : order) {
    const Video& v = videos[k];
    const auto& [vs, ls] =
        stats.at(cohort == Cohort::global ? std::string() : v.playlist_id);
    EngagementScore s = score_video(v.video_id, vs.normalize(v.views), ls.normalize(v.likes),
                                    polarity[k].p);
    report.videos.push_back(VideoRow{v.video_id, v.playlist_id, v.views, v.likes, s.nv, s.nl, s.p,
                                     s.e, s.tier, polarity[k].n_scored, polarity[k].no_comments});
    scores_by_playlist[v.playlist_id].push_back(std::move(s));
    polarity_by_playlist[v.playlist_id].push_back(polarity[k]);
  }

  std::vector<const Playlist*> playlists;
  for (const Playlist& p : ds.playlists()) playlists.push_back(&p);
  std::sort(playlists.begin(), playlists.end(),
            [](const Playlist* a, const Playlist* b) { return a->playlist_id < b->playlist_id; });
  for (const Playlist* p : playlists) {
    PlaylistRow row{p->playlist_id, std::nullopt, std::nullopt, std::nullopt, 0};
    if (auto it = scores_by_playlist.find(p->playlist_id); it != scores_by_playlist.end()) {
      const PlaylistPolarity pp =
          playlist_polarity(p->playlist_id, polarity_by_playlist.at(p->playlist_id));
      const PlaylistEngagement pe = playlist_engagement(p->playlist_id, it->second);
      row.p_p = pp.p;
      row.e = pe.e;
      row.tier = pe.tier;
      row.n_videos = pe.n_videos;
    }
    report.playlists.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Full run

struct PipelineResult {
  EngagementReport report;
  ClassificationRun classification;
  std::vector<std::filesystem::path> files;
};

namespace detail {

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.in_stage(stage);
  }
}

}  // namespace detail

inline std::filesystem::path cache_path_for(const PipelineConfig& config) {
  return config.output_dir / kCacheFile;
}

inline Dataset load_configured_dataset(const PipelineConfig& config) {
  return detail::in_stage("ingest", [&] {
    if (config.dataset_dir.empty()) config_error("dataset_dir", "missing");
    return load_dataset(config.dataset_dir);
  });
}

/// Runs every stage with a caller-supplied backend.
inline PipelineResult run_pipeline(const PipelineConfig& config, const Backend& backend) {
  PipelineResult result;
  const Dataset ds = load_configured_dataset(config);
  result.classification = detail::in_stage("classify", [&] {
    const auto cache = cache_path_for(config);
    if (config.cache_classifications) ensure_directory(config.output_dir);
    return classify_dataset(ds, backend, config.backend.max_parallel_requests,
                            config.cache_classifications ? &cache : nullptr);
  });
  result.report = detail::in_stage("score", [&] {
    return score_dataset(ds, result.classification.outcomes, config.normalization_cohort);
  });
  result.files = detail::in_stage(
      "report", [&] { return emit_report(result.report, config.format, config.output_dir); });
  return result;
}

inline PipelineResult run_pipeline(const PipelineConfig& config) {
  const auto backend = detail::in_stage("classify", [&] {
    validate_backend_config(config.backend);
    return make_backend(config.backend);
  });
  return run_pipeline(config, *backend);
}

}  // namespace sem
