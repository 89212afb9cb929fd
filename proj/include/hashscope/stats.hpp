#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ranges>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hashscope/corpus.hpp"
#include "hashscope/error.hpp"
#include "hashscope/phases.hpp"

namespace hashscope {

/// Hashtag -> occurrence count. Every occurrence counts, including repeats
/// inside one tweet.
class FrequencyTable {
 public:
  using Entry = std::pair<std::string, std::uint64_t>;

  void add(const std::string& token, std::uint64_t n = 1) {
    if (n == 0) return;
    counts_[token] += n;
    total_ += n;
  }

  void merge(const FrequencyTable& other) {
    for (const auto& [token, n] : other.counts_) add(token, n);
  }

  std::uint64_t count(const std::string& token) const {
    const auto it = counts_.find(token);
    return it == counts_.end() ? 0 : it->second;
  }
  bool contains(const std::string& token) const { return counts_.contains(token); }

  std::uint64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return counts_.empty(); }
  const std::unordered_map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }

  /// Count descending, ties lexicographic ascending.
  std::vector<Entry> sorted() const {
    std::vector<Entry> entries(counts_.begin(), counts_.end());
    std::sort(entries.begin(), entries.end(), by_count_desc);
    return entries;
  }

  static bool by_count_desc(const Entry& a, const Entry& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  }

  bool operator==(const FrequencyTable&) const = default;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct HistogramBucket {
  std::uint64_t value = 0;  // bucket key (share count, or hashtags per tweet)
  bool open_ended = false;  // "value+" overflow bucket
  std::uint64_t count = 0;
  double share = 0.0;

  std::string label() const { return std::to_string(value) + (open_ended ? "+" : ""); }
  bool operator==(const HistogramBucket&) const = default;
};

/// Nonzero buckets in ascending key order.
struct Histogram {
  std::vector<HistogramBucket> buckets;
  std::uint64_t total = 0;

  bool operator==(const Histogram&) const = default;
};

namespace detail {
inline Histogram make_histogram(const std::map<std::uint64_t, std::uint64_t>& counts,
                                std::optional<std::uint64_t> overflow_at = std::nullopt) {
  Histogram h;
  for (const auto& [value, n] : counts) {
    h.buckets.push_back({value, overflow_at && value >= *overflow_at, n, 0.0});
    h.total += n;
  }
  for (auto& b : h.buckets) b.share = static_cast<double>(b.count) / static_cast<double>(h.total);
  return h;
}
}  // namespace detail

/// Occurrence counts over the records whose phase is `scope` (all records
/// when scope is empty).
template <std::ranges::input_range Records>
FrequencyTable count_hashtags(Records&& records, std::optional<PhaseId> scope = std::nullopt,
                              const PhaseSchedule& schedule = PhaseSchedule::lok_sabha_2019()) {
  FrequencyTable table;
  for (const auto& record : records) {
    if (scope && schedule.assign(record.timestamp) != *scope) continue;
    for (const auto& tag : record.hashtags) table.add(tag);
  }
  return table;
}

/// One pass producing a table per phase (Pre and Post included).
template <std::ranges::input_range Records>
std::map<PhaseId, FrequencyTable> count_hashtags_by_phase(Records&& records, const PhaseSchedule& schedule) {
  std::map<PhaseId, FrequencyTable> tables;
  for (const auto& record : records) {
    auto& table = tables[schedule.assign(record.timestamp)];
    for (const auto& tag : record.hashtags) table.add(tag);
  }
  return tables;
}

/// For each share count c, how many distinct hashtags were shared exactly c
/// times.
inline Histogram share_count_distribution(const FrequencyTable& table) {
  if (table.empty()) throw Error(Errc::empty_input, "share-count distribution of an empty table");
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto& [token, n] : table.counts()) ++counts[n];
  return detail::make_histogram(counts);
}

inline constexpr std::uint64_t kPerTweetOverflow = 8;

inline std::uint64_t per_tweet_bucket(std::size_t hashtags) {
  return std::min<std::uint64_t>(hashtags, kPerTweetOverflow);
}

/// Hashtags-per-tweet histogram for every phase that has tweets; buckets
/// 1..7 plus "8+".
template <std::ranges::input_range Records>
std::map<PhaseId, Histogram> per_tweet_histogram(Records&& records, const PhaseSchedule& schedule) {
  std::map<PhaseId, std::map<std::uint64_t, std::uint64_t>> counts;
  for (const auto& record : records) ++counts[schedule.assign(record.timestamp)][per_tweet_bucket(record.hashtags.size())];
  std::map<PhaseId, Histogram> out;
  for (const auto& [phase, c] : counts) out.emplace(phase, detail::make_histogram(c, kPerTweetOverflow));
  return out;
}

/// Least-squares slope of log10(count) against log10(bucket) over the
/// nonzero buckets.
inline double powerlaw_slope(const Histogram& hist) {
  std::vector<std::pair<double, double>> points;
  for (const auto& b : hist.buckets) {
    if (b.count == 0 || b.value == 0) continue;
    points.emplace_back(std::log10(static_cast<double>(b.value)), std::log10(static_cast<double>(b.count)));
  }
  if (points.size() < 3) throw Error(Errc::insufficient_data, "power-law fit needs at least 3 nonzero buckets");
  const double n = static_cast<double>(points.size());
  double mean_x = 0, mean_y = 0;
  for (const auto& [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : points) {
    sxy += (x - mean_x) * (y - mean_y);
    sxx += (x - mean_x) * (x - mean_x);
  }
  return sxy / sxx;
}

}  // namespace hashscope
