#pragma once

// Scoring a sentiment backend against a labeled corpus: confusion matrix,
// accuracy, macro recall and macro F1.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sem/backend.hpp"
#include "sem/csv.hpp"
#include "sem/error.hpp"
#include "sem/sentiment.hpp"
#include "sem/unicode.hpp"

namespace sem {

struct LabeledSample {
  std::string text;
  SentimentLabel gold = SentimentLabel::neutral;
};

/// 3x3 counts indexed (gold, predicted) in negative/neutral/positive order.
class ConfusionMatrix {
 public:
  using Counts = std::array<std::array<std::uint64_t, 3>, 3>;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(const Counts& counts) : counts_(counts) {}

  void add(SentimentLabel gold, SentimentLabel predicted) { ++counts_[idx(gold)][idx(predicted)]; }

  std::uint64_t at(SentimentLabel gold, SentimentLabel predicted) const {
    return counts_[idx(gold)][idx(predicted)];
  }
  const Counts& counts() const { return counts_; }

  std::uint64_t row_sum(SentimentLabel gold) const {
    const auto& row = counts_[idx(gold)];
    return row[0] + row[1] + row[2];
  }
  std::uint64_t col_sum(SentimentLabel predicted) const {
    const std::size_t c = idx(predicted);
    return counts_[0][c] + counts_[1][c] + counts_[2][c];
  }
  std::uint64_t trace() const { return counts_[0][0] + counts_[1][1] + counts_[2][2]; }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts_) t += row[0] + row[1] + row[2];
    return t;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  static std::size_t idx(SentimentLabel l) { return static_cast<std::size_t>(l); }
  Counts counts_{};
};

inline ConfusionMatrix confusion_matrix(
    std::span<const std::pair<SentimentLabel, SentimentLabel>> pairs) {
  ConfusionMatrix m;
  for (const auto& [gold, predicted] : pairs) m.add(gold, predicted);
  return m;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  double accuracy = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::array<ClassMetrics, 3> per_class{};  // negative, neutral, positive
};

/// Per-class precision/recall/F1 are 0 when their denominator is 0, and such
/// classes still count in the unweighted macro mean over all three classes.
inline Metrics compute_metrics(const ConfusionMatrix& m) {
  const std::uint64_t total = m.total();
  if (total == 0) throw Error(Errc::empty_matrix, "confusion matrix has no samples");
  Metrics out;
  out.accuracy = static_cast<double>(m.trace()) / static_cast<double>(total);
  for (SentimentLabel label : kAllLabels) {
    ClassMetrics& c = out.per_class[static_cast<std::size_t>(label)];
    const auto tp = static_cast<double>(m.at(label, label));
    const std::uint64_t support = m.row_sum(label);
    const std::uint64_t predicted = m.col_sum(label);
    c.recall = support ? tp / static_cast<double>(support) : 0.0;
    c.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    c.f1 = (c.precision + c.recall) > 0.0
               ? 2.0 * c.precision * c.recall / (c.precision + c.recall)
               : 0.0;
    out.macro_recall += c.recall;
    out.macro_f1 += c.f1;
  }
  out.macro_recall /= 3.0;
  out.macro_f1 /= 3.0;
  return out;
}

struct EvalReport {
  std::string model_name;
  double accuracy = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix matrix;
  std::size_t n_failed = 0;
};

/// Classifies every sample; failures are counted and left out of the matrix.
/// Throws only when no sample could be classified.
inline EvalReport evaluate_backend(std::span<const LabeledSample> samples, const Backend& backend,
                                   std::size_t max_parallel, std::string model_name = {}) {
  if (samples.empty()) throw std::invalid_argument("evaluate_backend: no samples");
  std::vector<BatchItem> items;
  items.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    items.push_back(BatchItem{std::to_string(k), samples[k].text});
  }
  const BatchResult batch = classify_batch(items, backend, max_parallel);

  EvalReport report;
  report.model_name = model_name.empty() ? backend.model() : std::move(model_name);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const ClassificationOutcome& o = batch.outcomes[k];
    if (o.ok()) {
      report.matrix.add(samples[k].gold, o.sentiment().label);
    } else {
      ++report.n_failed;
    }
  }
  if (report.n_failed == samples.size()) {
    const FailureRecord& first = batch.outcomes.front().failure();
    throw BackendError(Errc::backend_unavailable,
                       "all " + std::to_string(samples.size()) +
                           " samples failed to classify; first: " + first.reason,
                       first.attempts);
  }
  const Metrics m = compute_metrics(report.matrix);
  report.accuracy = m.accuracy;
  report.macro_recall = m.macro_recall;
  report.macro_f1 = m.macro_f1;
  return report;
}

/// Labeled corpus: header `text,label`, label in {positive,negative,neutral}.
inline std::vector<LabeledSample> parse_labeled(std::string_view contents) {
  if (auto bad = unicode::first_invalid_utf8(contents)) {
    throw Error(Errc::non_utf8_input,
                "labeled file has invalid UTF-8 at byte " + std::to_string(*bad),
                std::to_string(*bad));
  }
  const auto records = csv::parse(contents);
  if (records.empty()) throw Error(Errc::missing_column, "missing column 'text'", "text");
  const auto& header = records.front().fields;
  std::size_t text_col = header.size(), label_col = header.size();
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "text") text_col = k;
    else if (header[k] == "label") label_col = k;
  }
  if (text_col == header.size()) throw Error(Errc::missing_column, "missing column 'text'", "text");
  if (label_col == header.size()) {
    throw Error(Errc::missing_column, "missing column 'label'", "label");
  }

  std::vector<LabeledSample> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const csv::Record& rec = records[r];
    auto fail = [&](const std::string& why) {
      throw Error(Errc::malformed_row, "row " + std::to_string(rec.line) + ": " + why,
                  std::to_string(rec.line));
    };
    if (rec.fields.size() != header.size()) fail("wrong number of fields");
    const std::string& text = rec.fields[text_col];
    if (unicode::trim(text).empty()) fail("empty text");
    const auto label = parse_label(rec.fields[label_col]);
    if (!label) fail("unknown label '" + rec.fields[label_col] + "'");
    out.push_back(LabeledSample{text, *label});
  }
  return out;
}

inline std::vector<LabeledSample> load_labeled(const std::filesystem::path& path) {
  return parse_labeled(csv::read_file(path));
}

}  // namespace sem
