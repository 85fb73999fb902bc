// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sem/sem.hpp"
#include "support/oracle.hpp"
#include "support/stub_server.hpp"

namespace fs = std::filesystem;
using namespace sem;
using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

namespace {

const fs::path kFixtures = SEM_FIXTURES_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sem_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

PipelineConfig lexicon_config(const fs::path& dataset, const fs::path& out) {
  PipelineConfig cfg;
  cfg.dataset_dir = dataset;
  cfg.output_dir = out;
  cfg.backend.kind = BackendKind::lexicon;
  cfg.backend.lexicon_path = kFixtures / "lexicon.csv";
  return cfg;
}

std::string slurp(const fs::path& p) { return csv::read_file(p); }

// 1. E in [-1, 3] over random valid triples; exact extremes.
Verdict range_reproduction() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0), pol(-1.0, 1.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const double e = engagement_score(unit(rng), unit(rng), pol(rng));
    violations += !(e >= -1.0 && e <= 3.0);
  }
  v.check(violations == 0, fmt::format("{} range violations", violations));
  v.check(engagement_score(1, 1, 1) == 3.0, "(1,1,1) != 3");
  v.check(engagement_score(0, 0, -1) == -1.0, "(0,0,-1) != -1");
  const double secs = seconds_since(t0);
  v.check(secs < 1.0, fmt::format("took {:.3f}s", secs));
  if (v.pass) v.detail = fmt::format("10000 triples, 0 violations, {:.3f}s", secs);
  return v;
}

// 2. P_v, P_p in [-1, 1] for random comment sets.
Verdict polarity_bounds() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    std::vector<VideoPolarity> videos;
    const int n_videos = 1 + static_cast<int>(rng() % 6);
    for (int vi = 0; vi < n_videos; ++vi) {
      std::vector<WeightedComment> ws;
      for (int c = static_cast<int>(rng() % 25); c > 0; --c) {
        const double x = rng() % 8 == 0 ? 1.0 : conf(rng);
        ws.push_back({"c", weighted_score({static_cast<SentimentLabel>(rng() % 3), x})});
      }
      videos.push_back(video_polarity("v", ws));
      violations += !(videos.back().p >= -1.0 && videos.back().p <= 1.0);
    }
    const double pp = playlist_polarity("p", videos).p;
    violations += !(pp >= -1.0 && pp <= 1.0);
  }
  const double secs = seconds_since(t0);
  v.check(violations == 0, fmt::format("{} violations", violations));
  v.check(secs < 1.0, fmt::format("took {:.3f}s", secs));
  if (v.pass) v.detail = fmt::format("10000 comment sets, 0 violations, {:.3f}s", secs);
  return v;
}

// 3. Tier thresholds, exact.
Verdict threshold_table() {
  Verdict v;
  const std::vector<std::pair<double, Tier>> table{{1.6, Tier::good},     {1.5, Tier::moderate},
                                                   {0.5, Tier::moderate}, {0.49, Tier::poor},
                                                   {-1.0, Tier::poor},    {3.0, Tier::good}};
  for (const auto& [e, want] : table) {
    const Tier got = classify_tier(e);
    v.check(got == want, fmt::format("{} -> {} (want {})", e, to_string(got), to_string(want)));
  }
  if (v.pass) v.detail = "6/6 boundary cases";
  return v;
}

// 4. Pipeline vs brute-force recomputation on 3 playlists / 10 videos / 50 comments.
Verdict oracle_equivalence() {
  Verdict v;
  const auto ds = load_dataset(kFixtures / "oracle");
  v.check(ds.playlists().size() == 3 && ds.videos().size() == 10 && ds.comments().size() == 50,
          "fixture shape is not 3/10/50");
  const auto result = run_pipeline(lexicon_config(kFixtures / "oracle", scratch("oracle")));
  const auto ref =
      testkit::brute_force_engagement(kFixtures / "oracle", kFixtures / "lexicon.csv");
  double worst = 0.0;
  for (const auto& row : result.report.videos) {
    worst = std::max(worst, std::abs(row.e - ref.video_e.at(row.video_id)));
  }
  for (const auto& row : result.report.playlists) {
    worst = std::max(worst, std::abs(*row.p_p - ref.playlist_p.at(row.playlist_id)));
    worst = std::max(worst, std::abs(*row.e - ref.playlist_e.at(row.playlist_id)));
  }
  v.check(result.report.videos.size() == 10 && result.report.playlists.size() == 3,
          "report row counts");
  v.check(worst <= 1e-12, fmt::format("max deviation {:.3e}", worst));
  if (v.pass) v.detail = fmt::format("max |pipeline - oracle| = {:.3e} <= 1e-12", worst);
  return v;
}

// 5. Metrics on the hand-computed matrix and against a naive pair loop.
Verdict metrics_correctness() {
  Verdict v;
  const auto m = compute_metrics(ConfusionMatrix({{{4, 1, 0}, {1, 3, 1}, {0, 1, 4}}}));
  const double want = 11.0 / 15.0;
  v.check(std::abs(m.accuracy - want) <= 1e-9, fmt::format("accuracy {}", m.accuracy));
  v.check(std::abs(m.macro_recall - want) <= 1e-9, fmt::format("recall {}", m.macro_recall));
  v.check(std::abs(m.macro_f1 - want) <= 1e-9, fmt::format("f1 {}", m.macro_f1));

  std::mt19937 rng(303);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::pair<SentimentLabel, SentimentLabel>> pairs;
    std::vector<std::pair<int, int>> raw;
    for (int n = 1 + static_cast<int>(rng() % 80); n > 0; --n) {
      const int g = static_cast<int>(rng() % 3), p = static_cast<int>(rng() % 3);
      pairs.emplace_back(static_cast<SentimentLabel>(g), static_cast<SentimentLabel>(p));
      raw.emplace_back(g, p);
    }
    const auto got = compute_metrics(confusion_matrix(pairs));
    const auto ref = testkit::naive_metrics(raw);
    worst = std::max({worst, std::abs(got.accuracy - ref.accuracy),
                      std::abs(got.macro_recall - ref.macro_recall),
                      std::abs(got.macro_f1 - ref.macro_f1)});
  }
  v.check(worst <= 1e-9, fmt::format("naive mismatch {:.3e}", worst));
  if (v.pass) v.detail = fmt::format("11/15 x3; 1000 random sets, max diff {:.1e}", worst);
  return v;
}

// 6. Evaluation harness substitute for the model comparison table.
Verdict evaluation_substitute() {
  Verdict v;
  LexiconBackend backend(load_lexicon(kFixtures / "lexicon.csv"));
  const auto aligned = evaluate_backend(load_labeled(kFixtures / "eval_aligned.csv"), backend, 2,
                                        "lexicon");
  v.check(aligned.accuracy == 1.0, fmt::format("aligned accuracy {}", aligned.accuracy));
  const auto perturbed = evaluate_backend(load_labeled(kFixtures / "eval_perturbed.csv"), backend,
                                          2, "lexicon");
  v.check(perturbed.accuracy == 5.0 / 6.0, fmt::format("perturbed accuracy {}", perturbed.accuracy));
  const auto dir = scratch("eval");
  const auto path = emit_eval_report(aligned, ReportFormat::csv, dir);
  const auto rows = csv::parse(slurp(path));
  v.check(rows.size() == 2 && rows[0].fields == std::vector<std::string>{"Model", "Accuracy",
                                                                          "Recall", "F1-Score"},
          "eval report columns");
  if (v.pass) v.detail = "accuracy 1.0 aligned, 5/6 perturbed, Model/Accuracy/Recall/F1-Score";
  return v;
}

// 7. Normalization endpoints and the degenerate cohort.
Verdict normalization_endpoints() {
  Verdict v;
  v.check(min_max_normalize({100, 500, 900}) == std::vector<double>{0.0, 0.5, 1.0},
          "[100,500,900]");
  v.check(min_max_normalize({7, 7, 7}) == std::vector<double>{0.5, 0.5, 0.5}, "[7,7,7]");
  if (v.pass) v.detail = "[0,0.5,1] and [0.5,0.5,0.5] exact";
  return v;
}

// 8. Byte-identical reruns; cached rerun makes no backend calls.
Verdict determinism() {
  Verdict v;
  auto a = lexicon_config(kFixtures / "oracle", scratch("det_a"));
  auto b = lexicon_config(kFixtures / "oracle", scratch("det_b"));
  a.cache_classifications = b.cache_classifications = false;
  run_pipeline(a);
  run_pipeline(b);
  for (const char* f : {"videos_engagement.csv", "playlists_engagement.csv"}) {
    v.check(slurp(a.output_dir / f) == slurp(b.output_dir / f), std::string(f) + " differs");
  }
  const auto cached = lexicon_config(kFixtures / "oracle", scratch("det_cache"));
  const auto first = run_pipeline(cached);
  const std::string videos = slurp(cached.output_dir / "videos_engagement.csv");
  const std::string playlists = slurp(cached.output_dir / "playlists_engagement.csv");
  const auto second = run_pipeline(cached);
  v.check(second.classification.backend_calls == 0,
          fmt::format("cached rerun made {} backend calls", second.classification.backend_calls));
  v.check(slurp(cached.output_dir / "videos_engagement.csv") == videos &&
              slurp(cached.output_dir / "playlists_engagement.csv") == playlists,
          "cached rerun output differs");
  v.check(slurp(cached.output_dir / "videos_engagement.csv") ==
              slurp(a.output_dir / "videos_engagement.csv"),
          "cached vs uncached output differs");
  if (v.pass) {
    v.detail = fmt::format("identical bytes; first run {} calls, cached rerun 0 calls",
                           first.classification.backend_calls);
  }
  return v;
}

// 9. Transient and permanent backend failures.
Verdict batch_robustness() {
  Verdict v;
  std::mutex mu;
  std::mt19937 rng(909);
  std::map<std::string, int> consecutive;
  int failed_requests = 0, total_requests = 0;
  testkit::StubServer flaky([&](const httplib::Request& req, httplib::Response& res) {
    const std::string prompt = testkit::prompt_of(req);
    {
      std::lock_guard lock(mu);
      ++total_requests;
      // Each request fails with p = 0.3; no prompt fails more than three
      // times in a row.
      if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.3 && consecutive[prompt] < 3) {
        ++consecutive[prompt];
        ++failed_requests;
        res.status = 503;
        return;
      }
      consecutive[prompt] = 0;
    }
    testkit::reply_completion(res, R"({"label":"positive","confidence":0.7})");
  });
  BackendConfig bc;
  bc.kind = BackendKind::http_llm;
  bc.endpoint_url = flaky.url();
  bc.model_name = "stub";
  bc.max_retries = 3;
  bc.retry_base_delay = 1ms;
  bc.request_timeout = 5s;
  HttpBackend backend(bc);
  std::vector<BatchItem> items;
  for (int k = 0; k < 200; ++k) items.push_back({"c" + std::to_string(k), "text " + std::to_string(k)});
  const auto batch = classify_batch(items, backend, 4);
  v.check(batch.summary.failed == 0, fmt::format("{} permanent failures", batch.summary.failed));
  v.check(batch.outcomes.size() == items.size(), "outcome count");
  const double rate = static_cast<double>(failed_requests) / total_requests;
  v.check(rate > 0.2 && rate < 0.4, fmt::format("stub failure rate {:.2f}", rate));

  testkit::StubServer dead([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  auto cfg = lexicon_config(kFixtures / "mini", scratch("dead"));
  cfg.backend = bc;
  cfg.backend.endpoint_url = dead.url();
  cfg.backend.max_retries = 1;
  const auto result = run_pipeline(cfg);
  v.check(result.classification.summary.failed == 10, "not all comments failed");
  bool degraded = result.report.videos.size() == 3;
  for (const auto& row : result.report.videos) {
    degraded = degraded && row.n_scored == 0 && row.no_comments && row.p == 0.0;
  }
  v.check(degraded, "videos not reported as degraded n_scored = 0 rows");
  if (v.pass) {
    v.detail = fmt::format("200 items, {:.0f}% requests failed, 0 permanent; dead stub -> 3 "
                           "degraded rows",
                           100 * rate);
  }
  return v;
}

// 10. Scoring a 1,000-comment dataset stays under a second.
Verdict performance_envelope() {
  Verdict v;
  const auto dir = scratch("perf_data");
  std::string playlists = "playlist_id,channel_id,title\n";
  std::string videos = "video_id,playlist_id,title,views,likes,duration_seconds,published_at\n";
  std::string comments = "comment_id,video_id,text,published_at\n";
  std::mt19937 rng(1000);
  const std::vector<std::string> words{"good", "bad", "great", "boring", "the", "lesson", "رائع",
                                       "clear", "video", "ممل", "slow", "helpful"};
  for (int p = 0; p < 5; ++p) playlists += fmt::format("p{},ch,Course {}\n", p, p);
  for (int k = 0; k < 40; ++k) {
    videos += fmt::format("v{:02},p{},Lesson {},{},{},600,2024-01-01T00:00:00Z\n", k, k % 5, k,
                          rng() % 50000, rng() % 2000);
  }
  for (int k = 0; k < 1000; ++k) {
    std::string text;
    for (int w = 0; w < 8; ++w) text += words[rng() % words.size()] + " ";
    comments += fmt::format("c{:04},v{:02},\"{}\",\n", k, rng() % 40, text);
  }
  csv::write_file(dir / "playlists.csv", playlists);
  csv::write_file(dir / "videos.csv", videos);
  csv::write_file(dir / "comments.csv", comments);

  auto cfg = lexicon_config(dir, scratch("perf_out"));
  cfg.cache_classifications = false;
  const auto t0 = Clock::now();
  const auto result = run_pipeline(cfg);
  const double secs = seconds_since(t0);
  v.check(result.classification.summary.classified == 1000, "not all comments classified");
  v.check(secs < 1.0, fmt::format("score took {:.3f}s", secs));
  if (v.pass) v.detail = fmt::format("1000 comments scored in {:.3f}s", secs);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1  range reproduction", range_reproduction},
      {"AC2  polarity bounds", polarity_bounds},
      {"AC3  threshold table", threshold_table},
      {"AC4  oracle equivalence", oracle_equivalence},
      {"AC5  metrics correctness", metrics_correctness},
      {"AC6  evaluation substitute", evaluation_substitute},
      {"AC7  normalization endpoints", normalization_endpoints},
      {"AC8  determinism", determinism},
      {"AC9  batch robustness", batch_robustness},
      {"AC10 performance envelope", performance_envelope},
  };
  const auto t0 = Clock::now();
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += !v.pass;
    fmt::print("{} {:<30} {}\n", v.pass ? "PASS" : "FAIL", name, v.detail);
  }
  fmt::print("acceptance: {}/{} passed in {:.2f}s\n", criteria.size() - failures, criteria.size(),
             seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
