#pragma once

// Min-max normalization of view/like counts and the engagement score
// E = NV + NL + P with its quality tiers.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sem/error.hpp"

namespace sem {

enum class Feature { views, likes };
enum class Cohort { global, per_playlist };

inline const char* to_string(Cohort c) { return c == Cohort::global ? "global" : "per_playlist"; }

struct NormalizationStats {
  Feature feature = Feature::views;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  Cohort cohort = Cohort::global;
  std::optional<std::string> cohort_id;

  /// (x - min) / (max - min); 0.5 for a degenerate cohort where max == min.
  double normalize(std::uint64_t x) const {
    if (max == min) return 0.5;
    if (x < min || x > max) throw std::out_of_range("value outside normalization cohort");
    return static_cast<double>(x - min) / static_cast<double>(max - min);
  }
};

template <std::unsigned_integral T>
NormalizationStats cohort_stats(std::span<const T> values, Feature feature,
                                Cohort cohort = Cohort::global,
                                std::optional<std::string> cohort_id = std::nullopt) {
  if (values.empty()) throw Error(Errc::empty_cohort, "cannot normalize an empty cohort");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return NormalizationStats{feature, static_cast<std::uint64_t>(*lo),
                            static_cast<std::uint64_t>(*hi), cohort, std::move(cohort_id)};
}

template <std::unsigned_integral T>
std::vector<double> min_max_normalize(std::span<const T> values) {
  const NormalizationStats stats = cohort_stats(values, Feature::views);
  std::vector<double> out;
  out.reserve(values.size());
  for (T x : values) out.push_back(stats.normalize(x));
  return out;
}

inline std::vector<double> min_max_normalize(std::initializer_list<std::uint64_t> values) {
  return min_max_normalize(std::span<const std::uint64_t>(values.begin(), values.size()));
}

inline double engagement_score(double nv, double nl, double p) {
  if (!(nv >= 0.0 && nv <= 1.0) || !(nl >= 0.0 && nl <= 1.0) || !(p >= -1.0 && p <= 1.0)) {
    throw std::invalid_argument("engagement_score: component out of range");
  }
  return nv + nl + p;
}

enum class Tier { good, moderate, poor };

inline const char* to_string(Tier t) {
  switch (t) {
    case Tier::good: return "Good";
    case Tier::moderate: return "Moderate";
    case Tier::poor: return "Poor";
  }
  return "Poor";
}

inline constexpr double kGoodAbove = 1.5;
inline constexpr double kPoorBelow = 0.5;

/// Good above 1.5, Poor below 0.5, Moderate on [0.5, 1.5] including both ends.
inline Tier classify_tier(double e) {
  if (!(e >= -1.0 && e <= 3.0)) throw std::invalid_argument("classify_tier: e outside [-1,3]");
  if (e > kGoodAbove) return Tier::good;
  if (e < kPoorBelow) return Tier::poor;
  return Tier::moderate;
}

struct EngagementScore {
  std::string video_id;
  double nv = 0.0;
  double nl = 0.0;
  double p = 0.0;
  double e = 0.0;
  Tier tier = Tier::poor;
};

inline EngagementScore score_video(std::string video_id, double nv, double nl, double p) {
  const double e = engagement_score(nv, nl, p);
  return EngagementScore{std::move(video_id), nv, nl, p, e, classify_tier(e)};
}

struct PlaylistEngagement {
  std::string playlist_id;
  double e = 0.0;
  Tier tier = Tier::poor;
  std::size_t n_videos = 0;
};

/// Mean of the member videos' E values, tiered like a single video.
inline PlaylistEngagement playlist_engagement(std::string playlist_id,
                                              std::span<const EngagementScore> scores) {
  if (scores.empty()) {
    throw Error(Errc::empty_playlist, "playlist '" + playlist_id + "' has no videos", playlist_id);
  }
  double sum = 0.0;
  for (const EngagementScore& s : scores) sum += s.e;
  const double e = sum / static_cast<double>(scores.size());
  return PlaylistEngagement{std::move(playlist_id), e, classify_tier(e), scores.size()};
}

}  // namespace sem
