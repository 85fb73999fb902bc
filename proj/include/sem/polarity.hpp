#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sem/error.hpp"
#include "sem/sentiment.hpp"

namespace sem {

struct WeightedComment {
  std::string comment_id;
  double w = 0.0;  // in [-1, 1]
};

struct VideoPolarity {
  std::string video_id;
  double p = 0.0;
  std::size_t n_scored = 0;
  bool no_comments = true;  // n_scored == 0, p == 0 by convention
};

struct PlaylistPolarity {
  std::string playlist_id;
  double p = 0.0;
  std::size_t n_videos = 0;
};

/// +confidence for positive, -confidence for negative, 0 for neutral.
inline double weighted_score(const SentimentResult& result) {
  if (!(result.confidence >= 0.0 && result.confidence <= 1.0)) {
    throw std::invalid_argument("weighted_score: confidence outside [0,1]");
  }
  switch (result.label) {
    case SentimentLabel::positive: return result.confidence;
    case SentimentLabel::negative: return -result.confidence;
    case SentimentLabel::neutral: return 0.0;
  }
  return 0.0;
}

/// Mean weighted score over the scored comments of one video. Neutral
/// comments count in the denominator. An empty list yields p = 0 with
/// `no_comments` set.
inline VideoPolarity video_polarity(std::string video_id, std::span<const WeightedComment> weights) {
  VideoPolarity out{std::move(video_id), 0.0, weights.size(), weights.empty()};
  if (weights.empty()) return out;
  double sum = 0.0;
  for (const WeightedComment& wc : weights) {
    if (!(wc.w >= -1.0 && wc.w <= 1.0)) {
      throw std::invalid_argument("video_polarity: weight outside [-1,1] for " + wc.comment_id);
    }
    sum += wc.w;
  }
  out.p = sum / static_cast<double>(weights.size());
  return out;
}

/// Unweighted mean of member video polarities; every video counts once
/// regardless of its comment volume.
inline PlaylistPolarity playlist_polarity(std::string playlist_id,
                                          std::span<const VideoPolarity> videos) {
  if (videos.empty()) {
    throw Error(Errc::empty_playlist, "playlist '" + playlist_id + "' has no videos", playlist_id);
  }
  double sum = 0.0;
  for (const VideoPolarity& v : videos) sum += v.p;
  return PlaylistPolarity{std::move(playlist_id), sum / static_cast<double>(videos.size()),
                          videos.size()};
}

}  // namespace sem
