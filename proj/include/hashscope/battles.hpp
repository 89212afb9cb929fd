#pragma once

// Candidate "battles": hashtags like #smritiiranivsrahulgandhi, the
// hashtags semantically close to each side, and two scores per candidate:
//
//   popularity = sum of counts of the retained similar hashtags
//   influence  = sum of counts of positive ones - sum of counts of negative ones

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hashscope/config.hpp"
#include "hashscope/embeddings.hpp"
#include "hashscope/error.hpp"
#include "hashscope/stats.hpp"
#include "hashscope/unicode.hpp"

namespace hashscope {

enum class Side : std::uint8_t { a, b };
enum class Winner : std::uint8_t { a, b, tie };

inline std::string_view winner_name(Winner w) {
  switch (w) {
    case Winner::a: return "a";
    case Winner::b: return "b";
    case Winner::tie: return "tie";
  }
  return "tie";
}

struct Battle {
  std::string battle_hashtag;
  std::string candidate_a;  // roster spelling when confirmed, raw fragment otherwise
  std::string candidate_b;
  bool confirmed = false;
  std::optional<Side> outcome;  // actual winner, when known

  bool operator==(const Battle&) const = default;
};

/// Lowercased, whitespace removed: "Smriti Irani" -> "smritiirani".
inline std::string name_key(std::string_view name) {
  std::string out;
  for (const char ch : name)
    if (ch != ' ' && ch != '\t') out += ch;
  return unicode::fold_case(out);
}

/// Name parts used to attribute a neighbor hashtag to a candidate: the full
/// key plus every space-separated part of 3+ bytes.
inline std::vector<std::string> name_parts(std::string_view name) {
  std::vector<std::string> parts{name_key(name)};
  std::size_t start = 0;
  while (start <= name.size()) {
    const auto end = std::min(name.find(' ', start), name.size());
    const auto part = unicode::fold_case(name.substr(start, end - start));
    if (part.size() >= 3 && std::find(parts.begin(), parts.end(), part) == parts.end()) parts.push_back(part);
    start = end + 1;
  }
  return parts;
}

inline constexpr std::size_t kMinFragment = 4;

/// A fragment of a battle hashtag matches a roster name when it contains the
/// whole name key, or when the name key contains the fragment and the
/// fragment is at least kMinFragment bytes ("digvijay" inside
/// "digvijayasingh"). The length floor keeps "na" and "ari" of "navsari"
/// from matching.
inline bool fragment_matches(std::string_view fragment, std::string_view key) {
  if (fragment.empty() || key.empty()) return false;
  if (fragment.find(key) != std::string_view::npos) return true;
  return fragment.size() >= kMinFragment && key.find(fragment) != std::string_view::npos;
}

/// Splits every hashtag containing "vs" or "versus". With a roster, a split
/// whose two sides match two different roster names is confirmed; otherwise
/// the first split is reported unconfirmed for manual review. Output is
/// sorted by hashtag count descending, ties lexicographic.
inline std::vector<Battle> find_battle_hashtags(const FrequencyTable& table, const std::vector<std::string>& roster) {
  std::vector<std::pair<std::string, std::string>> names;  // (display, key)
  for (const auto& name : roster)
    if (auto key = name_key(name); !key.empty()) names.emplace_back(name, std::move(key));

  const auto match = [&](std::string_view fragment) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (fragment_matches(fragment, names[i].second)) return i;
    return std::nullopt;
  };

  std::vector<Battle> out;
  for (const auto& [hashtag, count] : table.sorted()) {
    std::optional<Battle> first_split;
    std::optional<Battle> confirmed;
    for (const std::string_view separator : {"versus", "vs"}) {
      for (auto pos = hashtag.find(separator); pos != std::string::npos && !confirmed;
           pos = hashtag.find(separator, pos + 1)) {
        const std::string left = hashtag.substr(0, pos);
        const std::string right = hashtag.substr(pos + separator.size());
        if (left.empty() || right.empty()) continue;
        if (!first_split) first_split = Battle{hashtag, left, right, false, std::nullopt};
        const auto a = match(left);
        const auto b = match(right);
        if (a && b && *a != *b) confirmed = Battle{hashtag, names[*a].first, names[*b].first, true, std::nullopt};
      }
    }
    if (confirmed) out.push_back(std::move(*confirmed));
    else if (first_split) out.push_back(std::move(*first_split));
  }
  return out;
}

enum class Sentiment : std::uint8_t { positive, negative, neutral };

inline std::string_view sentiment_name(Sentiment s) {
  switch (s) {
    case Sentiment::positive: return "positive";
    case Sentiment::negative: return "negative";
    case Sentiment::neutral: return "neutral";
  }
  return "neutral";
}

/// Hashtag -> manual label. Lookups of unlabeled hashtags are errors.
class SentimentLexicon {
 public:
  void set(const std::string& hashtag, Sentiment label) { labels_[hashtag] = label; }

  std::optional<Sentiment> find(const std::string& hashtag) const {
    const auto it = labels_.find(hashtag);
    if (it == labels_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return labels_.size(); }

  /// `token<TAB>label` per line; label is positive, negative or neutral.
  /// Blank lines and '#' lines without a TAB are comments, so "#tag<TAB>label"
  /// still reads as an entry.
  static SentimentLexicon parse_tsv(std::istream& in) {
    SentimentLexicon lexicon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto tab = line.find('\t');
      if (line.empty() || (line.front() == '#' && tab == std::string::npos)) continue;
      if (tab == std::string::npos)
        throw Error(Errc::config, "lexicon line " + std::to_string(line_no) + ": expected token<TAB>label");
      const auto token = normalize_hashtag(line.substr(0, tab));
      const auto label = std::string(detail::trim(std::string_view(line).substr(tab + 1)));
      if (!token) throw Error(Errc::config, "lexicon line " + std::to_string(line_no) + ": bad hashtag");
      if (label == "positive") lexicon.set(*token, Sentiment::positive);
      else if (label == "negative") lexicon.set(*token, Sentiment::negative);
      else if (label == "neutral") lexicon.set(*token, Sentiment::neutral);
      else throw Error(Errc::config, "lexicon line " + std::to_string(line_no) + ": unknown label '" + label + "'");
    }
    return lexicon;
  }

 private:
  std::unordered_map<std::string, Sentiment> labels_;
};

inline std::vector<std::string> read_roster(std::istream& in) {
  std::vector<std::string> roster;
  std::string line;
  while (std::getline(in, line)) {
    const auto name = detail::trim(line);
    if (!name.empty() && name.front() != '#') roster.emplace_back(name);
  }
  return roster;
}

struct SimilarSets {
  std::array<std::string, 2> anchors;
  std::array<std::vector<std::string>, 2> hashtags;
};

/// Neighbors of each candidate after attribution and common-removal.
///
/// Each candidate's anchor is its name hashtag when that is in the
/// vocabulary, else the battle hashtag. The top-k neighbors of both anchors
/// are pooled; a neighbor naming exactly one candidate goes to that
/// candidate, any other neighbor goes to whichever anchors returned it.
/// Tokens that end up on both lists are removed from both.
inline SimilarSets candidate_similar_set(const EmbeddingMatrix& matrix, const Battle& battle, std::size_t k = 10) {
  const auto& vocab = matrix.vocabulary();
  const std::array<std::string, 2> names{battle.candidate_a, battle.candidate_b};
  SimilarSets out;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto key = name_key(names[c]);
    out.anchors[c] = vocab.contains(key) ? key : battle.battle_hashtag;
  }
  if (!vocab.contains(out.anchors[0]) || !vocab.contains(out.anchors[1]))
    throw Error(Errc::oov_battle, "neither candidate names nor #" + battle.battle_hashtag + " are in the vocabulary");

  const std::unordered_set<std::string> exclude{out.anchors[0], out.anchors[1], battle.battle_hashtag};
  const std::array<std::vector<std::string>, 2> parts{name_parts(names[0]), name_parts(names[1])};
  const auto names_candidate = [&](const std::string& token, std::size_t c) {
    return std::any_of(parts[c].begin(), parts[c].end(),
                       [&](const std::string& part) { return token.find(part) != std::string::npos; });
  };

  std::vector<std::string> pool;
  std::array<std::unordered_set<std::string>, 2> returned_by;
  for (std::size_t c = 0; c < 2; ++c) {
    for (const auto& [token, similarity] : most_similar(matrix, out.anchors[c], k, exclude)) {
      returned_by[c].insert(token);
      if (std::find(pool.begin(), pool.end(), token) == pool.end()) pool.push_back(token);
    }
  }

  std::array<std::vector<std::string>, 2> lists;
  for (const auto& token : pool) {
    const bool a = names_candidate(token, 0);
    const bool b = names_candidate(token, 1);
    for (std::size_t c = 0; c < 2; ++c) {
      const bool named = c == 0 ? a && !b : b && !a;
      const bool named_other = c == 0 ? b && !a : a && !b;
      if (named || (!named_other && returned_by[c].contains(token))) lists[c].push_back(token);
    }
  }
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& other = lists[1 - c];
    for (const auto& token : lists[c])
      if (std::find(other.begin(), other.end(), token) == other.end()) out.hashtags[c].push_back(token);
  }
  return out;
}

struct PopularityResult {
  std::uint64_t popularity = 0;
  std::vector<std::string> missing;  // tokens absent from the table (counted as 0)
};

inline PopularityResult popularity_detail(const std::vector<std::string>& similar, const FrequencyTable& table) {
  PopularityResult r;
  for (const auto& token : similar) {
    if (!table.contains(token)) r.missing.push_back(token);
    r.popularity += table.count(token);
  }
  return r;
}

inline std::uint64_t popularity(const std::vector<std::string>& similar, const FrequencyTable& table) {
  return popularity_detail(similar, table).popularity;
}

inline std::int64_t influence(const std::vector<std::string>& similar, const FrequencyTable& table,
                              const SentimentLexicon& lexicon) {
  std::vector<std::string> unlabeled;
  std::int64_t score = 0;
  for (const auto& token : similar) {
    const auto label = lexicon.find(token);
    if (!label) {
      unlabeled.push_back(token);
      continue;
    }
    const auto n = static_cast<std::int64_t>(table.count(token));
    if (*label == Sentiment::positive) score += n;
    else if (*label == Sentiment::negative) score -= n;
  }
  if (!unlabeled.empty()) {
    std::string message = "similar hashtags without a sentiment label:";
    for (const auto& t : unlabeled) message += " " + t;
    throw Error(Errc::unlabeled, message, std::move(unlabeled));
  }
  return score;
}

struct SimilarHashtag {
  std::string token;
  std::uint64_t count = 0;
  Sentiment label = Sentiment::neutral;
};

struct CandidateReport {
  std::string name;
  std::string anchor;
  std::vector<SimilarHashtag> similar_hashtags;
  std::size_t n = 0;  // retained similar hashtags
  std::size_t x = 0;  // positive
  std::size_t y = 0;  // negative
  std::uint64_t popularity = 0;
  std::int64_t influence = 0;
  std::uint64_t positive_count = 0;
  std::uint64_t negative_count = 0;
  std::vector<std::string> missing;

  double positive_share() const {
    return popularity == 0 ? 0.0 : static_cast<double>(positive_count) / static_cast<double>(popularity);
  }
  double negative_share() const {
    return popularity == 0 ? 0.0 : static_cast<double>(negative_count) / static_cast<double>(popularity);
  }
};

inline CandidateReport score_candidate(std::string name, std::string anchor, const std::vector<std::string>& similar,
                                       const FrequencyTable& table, const SentimentLexicon& lexicon) {
  CandidateReport r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.influence = influence(similar, table, lexicon);
  const auto pop = popularity_detail(similar, table);
  r.popularity = pop.popularity;
  r.missing = pop.missing;
  r.n = similar.size();
  for (const auto& token : similar) {
    const auto label = *lexicon.find(token);
    const auto count = table.count(token);
    r.similar_hashtags.push_back({token, count, label});
    if (label == Sentiment::positive) {
      ++r.x;
      r.positive_count += count;
    } else if (label == Sentiment::negative) {
      ++r.y;
      r.negative_count += count;
    }
  }
  return r;
}

/// Strictly greater influence wins.
inline Winner predict_winner(const CandidateReport& a, const CandidateReport& b) {
  if (a.influence > b.influence) return Winner::a;
  if (b.influence > a.influence) return Winner::b;
  return Winner::tie;
}

struct BattleReport {
  Battle battle;
  std::array<CandidateReport, 2> candidates;
  Winner predicted_winner = Winner::tie;
};

inline BattleReport score_battle(const EmbeddingMatrix& matrix, const Battle& battle, const FrequencyTable& table,
                                 const SentimentLexicon& lexicon, std::size_t k = 10) {
  const auto sets = candidate_similar_set(matrix, battle, k);
  BattleReport report{battle, {}, Winner::tie};
  report.candidates[0] = score_candidate(battle.candidate_a, sets.anchors[0], sets.hashtags[0], table, lexicon);
  report.candidates[1] = score_candidate(battle.candidate_b, sets.anchors[1], sets.hashtags[1], table, lexicon);
  report.predicted_winner = predict_winner(report.candidates[0], report.candidates[1]);
  return report;
}

}  // namespace hashscope
