// sem: engagement scoring for course playlists and their lesson videos.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "sem/sem.hpp"

namespace {

struct Flags {
  std::string config;
  std::string dataset_dir;
  std::string backend;
  std::string endpoint_url;
  std::string model;
  std::string lexicon;
  std::string cohort;
  std::string output_dir;
  std::string format;
  std::string eval_file;
  std::optional<std::size_t> max_parallel;
  std::optional<std::size_t> max_retries;
  bool no_cache = false;
};

enum class Command { ingest, classify, score, evaluate, report };

// Config file first (if any), then every flag that was given overrides it.
sem::PipelineConfig resolve_config(const Flags& f, bool needs_backend) {
  sem::PipelineConfig cfg;
  bool have_backend = false;
  if (!f.config.empty()) {
    cfg = sem::load_config(f.config);
    have_backend = true;
  } else {
    cfg.output_dir = "sem_output";
  }
  if (!f.dataset_dir.empty()) cfg.dataset_dir = f.dataset_dir;
  if (!f.backend.empty()) {
    cfg.backend.kind = sem::parse_backend_kind(f.backend);
    have_backend = true;
  }
  if (!f.endpoint_url.empty()) cfg.backend.endpoint_url = f.endpoint_url;
  if (!f.model.empty()) cfg.backend.model_name = f.model;
  if (!f.lexicon.empty()) cfg.backend.lexicon_path = f.lexicon;
  if (!f.cohort.empty()) cfg.normalization_cohort = sem::parse_cohort(f.cohort);
  if (!f.output_dir.empty()) cfg.output_dir = f.output_dir;
  if (!f.format.empty()) cfg.format = sem::parse_format(f.format);
  if (!f.eval_file.empty()) cfg.eval_file = f.eval_file;
  if (f.max_parallel) cfg.backend.max_parallel_requests = *f.max_parallel;
  if (f.max_retries) cfg.backend.max_retries = *f.max_retries;
  if (f.no_cache) cfg.cache_classifications = false;

  if (needs_backend) {
    if (!have_backend) sem::config_error("backend", "give --config or --backend");
    sem::validate_backend_config(cfg.backend);
  }
  return cfg;
}

void print_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& p : files) fmt::print("wrote {}\n", p.string());
}

int run(Command cmd, const Flags& flags) {
  const bool needs_backend = cmd == Command::classify || cmd == Command::score ||
                             cmd == Command::evaluate;
  const sem::PipelineConfig cfg = resolve_config(flags, needs_backend);

  switch (cmd) {
    case Command::ingest: {
      const sem::Dataset ds = sem::load_configured_dataset(cfg);
      fmt::print("playlists: {}\nvideos: {}\ncomments: {}\n", ds.playlists().size(),
                 ds.videos().size(), ds.comments().size());
      return 0;
    }
    case Command::classify: {
      const sem::Dataset ds = sem::load_configured_dataset(cfg);
      const auto backend = sem::make_backend(cfg.backend);
      sem::ensure_directory(cfg.output_dir);
      const auto cache = sem::cache_path_for(cfg);
      const auto run = sem::classify_dataset(ds, *backend, cfg.backend.max_parallel_requests, &cache);
      fmt::print("classified: {}\nfailed: {}\ncache hits: {}\nbackend calls: {}\nwrote {}\n",
                 run.summary.classified, run.summary.failed, run.cache_hits, run.backend_calls,
                 cache.string());
      return 0;
    }
    case Command::score: {
      const auto result = sem::run_pipeline(cfg);
      const auto& c = result.classification;
      fmt::print("videos: {}\nplaylists: {}\nclassified: {}\nfailed: {}\ncache hits: {}\n"
                 "backend calls: {}\n",
                 result.report.videos.size(), result.report.playlists.size(),
                 c.summary.classified, c.summary.failed, c.cache_hits, c.backend_calls);
      if (c.summary.failed) {
        fmt::print(stderr, "warning: {} comment(s) could not be classified and were excluded\n",
                   c.summary.failed);
      }
      print_files(result.files);
      return 0;
    }
    case Command::evaluate: {
      if (cfg.eval_file.empty()) sem::config_error("eval_file", "give --eval-file or eval_file");
      const auto samples = sem::load_labeled(cfg.eval_file);
      if (samples.empty()) sem::config_error("eval_file", "no labeled samples");
      const auto backend = sem::make_backend(cfg.backend);
      const auto report = sem::evaluate_backend(samples, *backend,
                                                cfg.backend.max_parallel_requests,
                                                cfg.backend.model_name);
      fmt::print("{}", sem::format_eval(report, sem::ReportFormat::csv));
      fmt::print("(recall and F1 are macro-averaged; {} sample(s) failed)\n", report.n_failed);
      print_files({sem::emit_eval_report(report, cfg.format, cfg.output_dir)});
      return 0;
    }
    case Command::report: {
      const sem::Dataset ds = sem::load_configured_dataset(cfg);
      const auto run = sem::outcomes_from_cache(ds, sem::cache_path_for(cfg));
      if (run.summary.failed) {
        fmt::print(stderr, "warning: {} comment(s) have no cached classification\n",
                   run.summary.failed);
      }
      const auto report = sem::score_dataset(ds, run.outcomes, cfg.normalization_cohort);
      print_files(sem::emit_report(report, cfg.format, cfg.output_dir));
      return 0;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment-weighted engagement scoring for e-learning playlists"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "JSON config file");
  app.add_option("--dataset-dir", flags.dataset_dir, "Directory with playlists/videos/comments CSV");
  app.add_option("--backend", flags.backend, "Sentiment backend")
      ->check(CLI::IsMember({"http", "lexicon"}));
  app.add_option("--endpoint-url", flags.endpoint_url, "Generation endpoint base URL");
  app.add_option("--model", flags.model, "Model name sent to the endpoint");
  app.add_option("--lexicon", flags.lexicon, "Lexicon file (word,label per line)");
  app.add_option("--cohort", flags.cohort, "Normalization cohort")
      ->check(CLI::IsMember({"global", "per_playlist"}));
  app.add_option("--output-dir", flags.output_dir, "Directory for reports and cache");
  app.add_option("--format", flags.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--eval-file", flags.eval_file, "Labeled text,label file for evaluate");
  app.add_option("--max-parallel", flags.max_parallel, "Concurrent backend requests");
  app.add_option("--max-retries", flags.max_retries, "Retries per request");
  app.add_flag("--no-cache", flags.no_cache, "Do not read or write the classification cache");

  Command cmd = Command::score;
  app.add_subcommand("ingest", "Validate a dataset directory")
      ->callback([&] { cmd = Command::ingest; });
  app.add_subcommand("classify", "Classify comments and populate the cache")
      ->callback([&] { cmd = Command::classify; });
  app.add_subcommand("score", "Compute engagement reports")
      ->callback([&] { cmd = Command::score; });
  app.add_subcommand("evaluate", "Score a backend against a labeled file")
      ->callback([&] { cmd = Command::evaluate; });
  app.add_subcommand("report", "Re-emit reports from cached classifications")
      ->callback([&] { cmd = Command::report; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(sem::ExitCode::usage);
  }

  try {
    return run(cmd, flags);
  } catch (const sem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(sem::exit_code_for(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(sem::ExitCode::data);
  }
}
