#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hashscope/events.hpp"
#include "hashscope/trends.hpp"
#include "support/synthetic.hpp"

using namespace hashscope;

namespace {

FrequencyTable table_of(std::initializer_list<std::pair<const char*, std::uint64_t>> entries) {
  FrequencyTable t;
  for (const auto& [k, n] : entries) t.add(k, n);
  return t;
}

std::vector<std::string> names(const TrendList& l) {
  std::vector<std::string> out;
  for (const auto& e : l.entries) out.push_back(e.hashtag);
  return out;
}

TweetRecord tweet(std::string text, std::vector<std::string> tags) {
  TweetRecord r;
  r.timestamp = *parse_rfc3339("2019-04-20T10:00:00Z");
  r.text = std::move(text);
  r.hashtags = std::move(tags);
  return r;
}

}  // namespace

TEST(Trends, TieBreakAndWeights) {
  const auto l = top_hashtags(table_of({{"b", 5}, {"a", 5}, {"c", 1}}), 2);
  EXPECT_EQ(names(l), (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(l.entries[1].weight, 1.0);
  const auto all = top_hashtags(table_of({{"b", 4}, {"a", 5}, {"c", 1}}), 50);
  EXPECT_EQ(names(all), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_DOUBLE_EQ(all.entries[2].weight, 0.2);
  EXPECT_THROW(top_hashtags(FrequencyTable{}, 0), Error);
}

TEST(Trends, PhaseExclusion) {
  const auto overall = top_hashtags(table_of({{"a", 100}}), 1);
  std::map<PhaseId, FrequencyTable> per{{PhaseId::p1, table_of({{"a", 9}, {"b", 2}, {"c", 1}})},
                                        {PhaseId::p2, table_of({{"a", 3}})}};
  const auto phases = phase_trends(per, overall, 2);
  EXPECT_EQ(names(phases.at(PhaseId::p1)), (std::vector<std::string>{"b", "c"}));
  EXPECT_TRUE(phases.at(PhaseId::p2).entries.empty());
}

TEST(Trends, ExhaustiveDisjointnessAndPlantedPhaseTags) {
  auto c = synth::phase_corpus(30000, 8, 400);
  // plant a phase-only tag per voting phase, frequent within the phase
  const auto schedule = PhaseSchedule::lok_sabha_2019();
  for (std::size_t i = 0; i < c.records.size(); i += 5) {
    auto& r = c.records[i];
    const auto p = schedule.assign(r.timestamp);
    if (phase_number(p) >= 1 && phase_number(p) <= 7) r.hashtags.push_back("only_" + phase_name(p));
  }
  const auto per = count_hashtags_by_phase(c.records, schedule);
  const auto overall = top_hashtags(count_hashtags(c.records), 50);
  const auto phases = phase_trends(per, overall, 50);
  for (const auto& [phase, list] : phases) {
    for (const auto& e : list.entries) EXPECT_FALSE(overall.contains(e.hashtag)) << e.hashtag;
    EXPECT_EQ(list.scope, phase);
    for (const auto& [other, l2] : phases) {
      if (phase_number(other) < 1 || phase_number(other) > 7) continue;
      EXPECT_EQ(list.contains("only_" + phase_name(other)), other == phase);
    }
  }
  EXPECT_EQ(phase_trends(per, overall, 50), phases);  // deterministic
}

TEST(Sentences, Examples) {
  EXPECT_EQ(sentence_count("Go vote. It matters!"), 2u);
  EXPECT_EQ(sentence_count("one sentence only"), 1u);
  EXPECT_EQ(sentence_count("A? B. C!"), 3u);
  EXPECT_EQ(sentence_count(""), 0u);
  EXPECT_EQ(sentence_count("Wait... what?!"), 2u);
}

TEST(Eligible, Examples) {
  EXPECT_EQ(eligible_hashtags(table_of({{"a", 9000}, {"b", 8000}, {"c", 100}}), 8000), std::vector<std::string>{"a"});
  EXPECT_EQ(eligible_hashtags(table_of({{"a", 2}, {"b", 1}}), 0), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(eligible_hashtags(FrequencyTable{}, 0).empty());
}

TEST(PickEvent, SingleAndEmptyPool) {
  std::vector<TweetRecord> rs{tweet("Vote. Now!", {"x"}), tweet("single sentence", {"x"}), tweet("Two. Here.", {"y"})};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = pick_event("#X", rs, seed);
    EXPECT_EQ(p.tweet.text, "Vote. Now!");
    EXPECT_EQ(p.candidate_pool_size, 1u);
  }
  try {
    pick_event("z", rs, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_eligible_tweet);
  }
}

TEST(PickEvent, SeedReplayAndContract) {
  std::vector<TweetRecord> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(tweet("Tweet " + std::to_string(i) + ". More!", {"x", "w"}));
  const auto a = pick_event("x", rs, 42);
  const auto b = pick_event("x", rs, 42);
  EXPECT_EQ(a.tweet.text, b.tweet.text);
  EXPECT_EQ(a.candidate_pool_size, 100u);
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto p = pick_event("x", rs, seed);
    EXPECT_TRUE(is_event_candidate(p.tweet, "x"));
    seen.insert(p.tweet.text);
  }
  EXPECT_GT(seen.size(), 80u);
}
