#pragma once

#include <algorithm>
#include <cstdint>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

#include "hashscope/corpus.hpp"
#include "hashscope/error.hpp"
#include "hashscope/rng.hpp"
#include "hashscope/stats.hpp"

namespace hashscope {

inline constexpr std::uint64_t kDefaultEventThreshold = 8000;

struct EventPick {
  std::string hashtag;
  TweetRecord tweet;
  std::size_t candidate_pool_size = 0;
  std::uint64_t seed = 0;
};

/// Segments ended by '.', '!', '?' or end of text that hold at least one
/// non-whitespace character. No abbreviation handling.
inline std::size_t sentence_count(std::string_view text) {
  std::size_t sentences = 0;
  bool has_content = false;
  for (const char ch : text) {
    if (ch == '.' || ch == '!' || ch == '?') {
      if (has_content) ++sentences;
      has_content = false;
    } else if (ch != ' ' && ch != '\t' && ch != '\n' && ch != '\r' && ch != '\f' && ch != '\v') {
      has_content = true;
    }
  }
  return sentences + (has_content ? 1 : 0);
}

/// Hashtags shared strictly more than `threshold` times, most shared first.
inline std::vector<std::string> eligible_hashtags(const FrequencyTable& table,
                                                  std::uint64_t threshold = kDefaultEventThreshold) {
  std::vector<std::string> out;
  for (const auto& [token, n] : table.sorted())
    if (n > threshold) out.push_back(token);
  return out;
}

inline bool is_event_candidate(const TweetRecord& record, const std::string& hashtag) {
  return std::find(record.hashtags.begin(), record.hashtags.end(), hashtag) != record.hashtags.end() &&
         sentence_count(record.text) >= 2;
}

/// Collects, in stream order, the tweets carrying `hashtag` that have at
/// least two sentences and returns one chosen with
/// SplitMix64(seed).uniform_index(pool size).
template <std::ranges::input_range Records>
EventPick pick_event(std::string_view hashtag, Records&& records, std::uint64_t seed) {
  const auto query = normalize_hashtag(hashtag);
  if (!query) throw Error(Errc::invalid_argument, "not a hashtag: '" + std::string(hashtag) + "'");
  std::vector<TweetRecord> pool;
  for (const auto& record : records)
    if (is_event_candidate(record, *query)) pool.push_back(record);
  if (pool.empty()) throw Error(Errc::no_eligible_tweet, "no tweet with #" + *query + " has two or more sentences");
  SplitMix64 rng(seed);
  const auto index = rng.uniform_index(pool.size());
  return EventPick{*query, std::move(pool[index]), pool.size(), seed};
}

}  // namespace hashscope
