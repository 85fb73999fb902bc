#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sem/evaluation.hpp"
#include "support/oracle.hpp"

using namespace sem;

namespace {

using Pair = std::pair<SentimentLabel, SentimentLabel>;
constexpr auto Neg = SentimentLabel::negative;
constexpr auto Neu = SentimentLabel::neutral;
constexpr auto Pos = SentimentLabel::positive;

std::vector<Pair> pairs_from_matrix(const ConfusionMatrix::Counts& rows) {
  std::vector<Pair> out;
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::uint64_t k = 0; k < rows[g][p]; ++k) {
        out.emplace_back(static_cast<SentimentLabel>(g), static_cast<SentimentLabel>(p));
      }
    }
  }
  return out;
}

Lexicon fixture_lexicon() {
  return load_lexicon(std::filesystem::path(SEM_FIXTURES_DIR) / "lexicon.csv");
}

}  // namespace

TEST(ConfusionMatrix, Tally) {
  const std::vector<Pair> pairs{{Pos, Pos}, {Neg, Pos}, {Neu, Neu}};
  const auto m = confusion_matrix(pairs);
  EXPECT_EQ(m.at(Pos, Pos), 1u);
  EXPECT_EQ(m.at(Neg, Pos), 1u);
  EXPECT_EQ(m.at(Neu, Neu), 1u);
  EXPECT_EQ(m.total(), 3u);
  EXPECT_EQ(confusion_matrix({}).total(), 0u);
}

TEST(ConfusionMatrix, ConstructedFixture) {
  const ConfusionMatrix::Counts rows{{{4, 1, 0}, {1, 3, 1}, {0, 1, 4}}};
  const auto pairs = pairs_from_matrix(rows);
  ASSERT_EQ(pairs.size(), 15u);
  EXPECT_EQ(confusion_matrix(pairs).counts(), rows);
}

TEST(ComputeMetrics, HandComputedMatrix) {
  const auto m = compute_metrics(ConfusionMatrix({{{4, 1, 0}, {1, 3, 1}, {0, 1, 4}}}));
  EXPECT_NEAR(m.accuracy, 11.0 / 15.0, 1e-9);
  EXPECT_NEAR(m.macro_recall, 11.0 / 15.0, 1e-9);
  EXPECT_NEAR(m.macro_f1, 11.0 / 15.0, 1e-9);
  EXPECT_NEAR(m.per_class[0].recall, 0.8, 1e-12);
  EXPECT_NEAR(m.per_class[1].precision, 0.6, 1e-12);
}

TEST(ComputeMetrics, PerfectAndDegenerate) {
  const auto perfect = compute_metrics(ConfusionMatrix({{{2, 0, 0}, {0, 5, 0}, {0, 0, 1}}}));
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.macro_recall, 1.0);
  EXPECT_EQ(perfect.macro_f1, 1.0);
  // Balanced gold, everything predicted positive.
  const auto one_class = compute_metrics(ConfusionMatrix({{{0, 0, 1}, {0, 0, 1}, {0, 0, 1}}}));
  EXPECT_NEAR(one_class.accuracy, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(one_class.macro_recall, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(one_class.macro_f1, (2.0 * (1.0 / 3.0) / (4.0 / 3.0)) / 3.0, 1e-15);
  // Zero-support class contributes 0 to the macro mean.
  const auto missing = compute_metrics(ConfusionMatrix({{{0, 0, 0}, {0, 2, 0}, {0, 0, 2}}}));
  EXPECT_NEAR(missing.macro_recall, 2.0 / 3.0, 1e-15);
  EXPECT_THROW(compute_metrics(ConfusionMatrix{}), Error);
}

TEST(ComputeMetrics, AgreesWithNaivePairLoop) {
  std::mt19937 rng(2024);
  for (int k = 0; k < 1000; ++k) {
    std::vector<Pair> pairs;
    std::vector<std::pair<int, int>> raw;
    for (int n = 1 + static_cast<int>(rng() % 60); n > 0; --n) {
      const int g = static_cast<int>(rng() % 3), p = static_cast<int>(rng() % 3);
      pairs.emplace_back(static_cast<SentimentLabel>(g), static_cast<SentimentLabel>(p));
      raw.emplace_back(g, p);
    }
    const auto m = compute_metrics(confusion_matrix(pairs));
    const auto ref = testkit::naive_metrics(raw);
    ASSERT_NEAR(m.accuracy, ref.accuracy, 1e-9);
    ASSERT_NEAR(m.macro_recall, ref.macro_recall, 1e-9);
    ASSERT_NEAR(m.macro_f1, ref.macro_f1, 1e-9);
    ASSERT_GE(m.macro_f1, 0.0);
    ASSERT_LE(m.macro_f1, 1.0);

    // Order and label-permutation invariance.
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const int perm[3] = {2, 0, 1};
    std::vector<Pair> permuted;
    for (const auto& [g, p] : pairs) {
      permuted.emplace_back(static_cast<SentimentLabel>(perm[static_cast<int>(g)]),
                            static_cast<SentimentLabel>(perm[static_cast<int>(p)]));
    }
    const auto shuffled = compute_metrics(confusion_matrix(pairs));
    const auto relabeled = compute_metrics(confusion_matrix(permuted));
    ASSERT_NEAR(shuffled.macro_f1, m.macro_f1, 1e-12);
    ASSERT_NEAR(relabeled.accuracy, m.accuracy, 1e-12);
    ASSERT_NEAR(relabeled.macro_recall, m.macro_recall, 1e-12);
    ASSERT_NEAR(relabeled.macro_f1, m.macro_f1, 1e-12);
  }
}

TEST(EvaluateBackend, LexiconAlignedFixture) {
  const auto samples =
      load_labeled(std::filesystem::path(SEM_FIXTURES_DIR) / "eval_aligned.csv");
  ASSERT_EQ(samples.size(), 6u);
  LexiconBackend backend(fixture_lexicon());
  const auto r = evaluate_backend(samples, backend, 2, "lexicon");
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.macro_recall, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(r.n_failed, 0u);
  EXPECT_EQ(r.model_name, "lexicon");
}

TEST(EvaluateBackend, PerturbedGold) {
  const auto samples =
      load_labeled(std::filesystem::path(SEM_FIXTURES_DIR) / "eval_perturbed.csv");
  LexiconBackend backend(fixture_lexicon());
  const auto r = evaluate_backend(samples, backend, 1);
  EXPECT_EQ(r.accuracy, 5.0 / 6.0);
  EXPECT_EQ(r.matrix.at(Pos, Neu), 1u);
  EXPECT_EQ(r.model_name, backend.model());
}

namespace {

class FlakyBackend final : public Backend {
 public:
  explicit FlakyBackend(bool all) : all_(all) {}
  BackendKind kind() const override { return BackendKind::http_llm; }
  std::string model() const override { return "flaky"; }
  SentimentResult classify(std::string_view text) const override {
    if (all_ || text == "fail") throw BackendError(Errc::backend_unavailable, "down", 3);
    return {SentimentLabel::positive, 1.0};
  }

 private:
  bool all_;
};

}  // namespace

TEST(EvaluateBackend, FailuresExcludedFromMatrix) {
  const std::vector<LabeledSample> samples{{"ok", Pos}, {"fail", Neg}, {"fine", Pos}};
  const auto r = evaluate_backend(samples, FlakyBackend(false), 2);
  EXPECT_EQ(r.n_failed, 1u);
  EXPECT_EQ(r.matrix.total(), 2u);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(EvaluateBackend, AllFailedPropagates) {
  const std::vector<LabeledSample> samples{{"a", Pos}, {"b", Neg}};
  EXPECT_THROW(evaluate_backend(samples, FlakyBackend(true), 2), BackendError);
  EXPECT_THROW(evaluate_backend({}, FlakyBackend(false), 2), std::invalid_argument);
}

TEST(LabeledFile, Errors) {
  EXPECT_THROW(parse_labeled("text\nhello\n"), Error);
  EXPECT_THROW(parse_labeled("text,label\nhello,joyful\n"), Error);
  EXPECT_THROW(parse_labeled("text,label\n\" \",positive\n"), Error);
  const auto ok = parse_labeled("label,text\nNeutral,\"a, b\"\n");
  ASSERT_EQ(ok.size(), 1u);
  EXPECT_EQ(ok[0].text, "a, b");
  EXPECT_EQ(ok[0].gold, Neu);
}
