#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hashscope/error.hpp"
#include "hashscope/time.hpp"
#include "hashscope/unicode.hpp"

namespace hashscope {

/// One archived post. Only the three retained fields survive ingestion.
struct TweetRecord {
  Timestamp timestamp{};
  std::string text;
  std::vector<std::string> hashtags;  // lowercase-folded, no '#', textual order

  bool operator==(const TweetRecord&) const = default;
};

/// Removes the spaces a user typed between '#' and the tag body, so
/// "# elections2019" is captured as "#elections2019". Everything else is
/// copied byte for byte.
inline std::string repair_spaced_hashtags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    out.push_back(ch);
    ++i;
    if (ch != '#') continue;
    std::size_t j = i;
    while (j < text.size() && text[j] == ' ') ++j;
    if (j == i || j == text.size()) continue;
    std::size_t probe = j;
    if (unicode::is_word_char(unicode::next_code_point(text, probe))) i = j;
  }
  return out;
}

/// Every maximal run of word characters immediately after a '#', case folded,
/// in textual order. Run on repaired text.
inline std::vector<std::string> extract_hashtags(std::string_view text) {
  std::vector<std::string> tags;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '#') {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < text.size()) {
      std::size_t probe = end;
      if (!unicode::is_word_char(unicode::next_code_point(text, probe))) break;
      end = probe;
    }
    if (end > i + 1) tags.push_back(unicode::fold_case(text.substr(i + 1, end - i - 1)));
    i = std::max(end, i + 1);
  }
  return tags;
}

/// Normalizes a hashtag given outside of text ("#ModiBiopic", "modibiopic").
/// Returns nullopt when the body is empty or has non-word characters.
inline std::optional<std::string> normalize_hashtag(std::string_view raw) {
  while (!raw.empty() && raw.front() == '#') raw.remove_prefix(1);
  if (raw.empty()) return std::nullopt;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    if (!unicode::is_word_char(unicode::next_code_point(raw, pos))) return std::nullopt;
  }
  return unicode::fold_case(raw);
}

/// Parses one line of archived JSON ({"timestamp", "text", "hashtags"?}).
/// Hashtags are re-extracted from the repaired text; supplied tags that
/// normalize cleanly and were not found in the text are appended in their
/// supplied order.
inline TweetRecord parse_record(std::string_view line) {
  if (!unicode::is_valid_utf8(line)) throw Error(Errc::malformed, "invalid UTF-8");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::malformed, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::malformed, "record is not a JSON object");

  const auto ts_field = doc.find("timestamp");
  const auto text_field = doc.find("text");
  if (ts_field == doc.end() || !ts_field->is_string()) throw Error(Errc::schema, "missing string field 'timestamp'");
  if (text_field == doc.end() || !text_field->is_string()) throw Error(Errc::schema, "missing string field 'text'");

  TweetRecord record;
  const auto& ts_text = ts_field->get_ref<const std::string&>();
  const auto ts = parse_rfc3339(ts_text);
  if (!ts) throw Error(Errc::timestamp, "unparseable timestamp '" + ts_text + "'");
  record.timestamp = *ts;
  record.text = text_field->get<std::string>();
  record.hashtags = extract_hashtags(repair_spaced_hashtags(record.text));

  if (const auto supplied = doc.find("hashtags"); supplied != doc.end() && !supplied->is_null()) {
    if (!supplied->is_array()) throw Error(Errc::schema, "'hashtags' must be an array of strings");
    std::vector<std::string> extra;
    for (const auto& tag : *supplied) {
      if (!tag.is_string()) throw Error(Errc::schema, "'hashtags' must be an array of strings");
      auto normalized = normalize_hashtag(tag.get_ref<const std::string&>());
      if (!normalized) continue;
      if (std::find(record.hashtags.begin(), record.hashtags.end(), *normalized) != record.hashtags.end())
        continue;
      if (std::find(extra.begin(), extra.end(), *normalized) != extra.end()) continue;
      extra.push_back(std::move(*normalized));
    }
    for (auto& tag : extra) record.hashtags.push_back(std::move(tag));
  }
  return record;
}

/// Normalized output line: {"timestamp","text","hashtags"} in that order.
inline std::string to_json_line(const TweetRecord& record) {
  nlohmann::ordered_json doc;
  doc["timestamp"] = format_utc(record.timestamp);
  doc["text"] = record.text;
  doc["hashtags"] = record.hashtags;
  return doc.dump();
}

/// Corpus-level summary over the records that survive filtering.
struct CorpusStats {
  std::uint64_t total_tweets = 0;
  std::uint64_t total_hashtags = 0;
  std::uint64_t unique_hashtags = 0;
  std::uint64_t min_per_tweet = 0;
  std::uint64_t max_per_tweet = 0;
  double mean_per_tweet = 0.0;
  bool mean_defined = false;  // false for an empty corpus; mean is then reported as 0

  bool operator==(const CorpusStats&) const = default;
};

/// One-pass accumulator. Accumulators over disjoint shards merge into the
/// same result as a single pass.
class CorpusAccumulator {
 public:
  void add(const TweetRecord& record) {
    const std::uint64_t n = record.hashtags.size();
    ++tweets_;
    hashtags_ += n;
    min_ = std::min(min_, n);
    max_ = std::max(max_, n);
    for (const auto& tag : record.hashtags) unique_.insert(tag);
  }

  void merge(const CorpusAccumulator& other) {
    tweets_ += other.tweets_;
    hashtags_ += other.hashtags_;
    min_ = std::min(min_, other.min_);
    max_ = std::max(max_, other.max_);
    unique_.insert(other.unique_.begin(), other.unique_.end());
  }

  CorpusStats stats() const {
    CorpusStats s;
    s.total_tweets = tweets_;
    s.total_hashtags = hashtags_;
    s.unique_hashtags = unique_.size();
    if (tweets_ > 0) {
      s.min_per_tweet = min_;
      s.max_per_tweet = max_;
      s.mean_per_tweet = static_cast<double>(hashtags_) / static_cast<double>(tweets_);
      s.mean_defined = true;
    }
    return s;
  }

 private:
  std::uint64_t tweets_ = 0;
  std::uint64_t hashtags_ = 0;
  std::uint64_t min_ = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t max_ = 0;
  std::unordered_set<std::string> unique_;
};

/// Passes records with at least one hashtag to `sink`, in input order, and
/// returns the stats of the survivors.
template <std::ranges::input_range Records, typename Sink>
CorpusStats filter_corpus(Records&& records, Sink&& sink) {
  CorpusAccumulator accumulator;
  for (auto&& record : records) {
    if (record.hashtags.empty()) continue;
    accumulator.add(record);
    sink(std::forward<decltype(record)>(record));
  }
  return accumulator.stats();
}

template <std::ranges::input_range Records>
std::pair<std::vector<TweetRecord>, CorpusStats> filter_corpus(Records&& records) {
  std::vector<TweetRecord> survivors;
  auto stats = filter_corpus(std::forward<Records>(records),
                             [&](const TweetRecord& record) { survivors.push_back(record); });
  return {std::move(survivors), stats};
}

}  // namespace hashscope
