#pragma once

// Subcommand orchestration shared by the hashscope CLI and the tests.
// Every stage reads its inputs from the output directory written by
// earlier stages, writes its own artifacts, and records an entry in
// manifest.json with the effective configuration and its hash. Passing a
// stage's <stage>.conf back with --config replays it.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ranges>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "hashscope/battles.hpp"
#include "hashscope/config.hpp"
#include "hashscope/corpus.hpp"
#include "hashscope/csv.hpp"
#include "hashscope/embeddings.hpp"
#include "hashscope/error.hpp"
#include "hashscope/events.hpp"
#include "hashscope/phases.hpp"
#include "hashscope/stats.hpp"
#include "hashscope/topics.hpp"
#include "hashscope/trends.hpp"

namespace hashscope {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kCorpusFormat = "hashscope-corpus/1";
inline constexpr std::string_view kManifestFormat = "hashscope-manifest/1";
inline constexpr std::string_view kCsvFormat = "hashscope-csv/1";

inline std::string version_text() {
  std::string out = "hashscope " + std::string(kVersion) + "\n";
  out += "corpus        " + std::string(kCorpusFormat) + "\n";
  out += "lda model     " + std::string(kLdaMagic) + "\n";
  out += "vectors       " + std::string(kVectorMagic) + "\n";
  out += "manifest      " + std::string(kManifestFormat) + "\n";
  out += "csv           " + std::string(kCsvFormat) + "\n";
  return out;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = 0xCBF29CE484222325ULL) {
  for (const char ch : bytes) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

inline std::string hex64(std::uint64_t v) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(v));
  return buffer;
}

/// Thrown for command-line and configuration problems (exit status 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline KeyValues default_key_values() {
  KeyValues kv = PhaseSchedule::lok_sabha_2019().to_key_values();
  const std::pair<const char*, const char*> defaults[] = {
      {"input", ""},
      {"out", "out"},
      {"threads", "1"},
      {"seed", "0"},
      {"trends.n", "50"},
      {"events.threshold", "8000"},
      {"events.hashtag", ""},
      {"lda.kmin", "5"},
      {"lda.kmax", "40"},
      {"lda.kstep", "5"},
      {"lda.alpha", "auto"},
      {"lda.beta", "0.01"},
      {"lda.sweeps", "1000"},
      {"lda.min_tags", "5"},
      {"lda.vocab_floor", "1"},
      {"lda.top_m", "10"},
      {"lda.rel_eps", "0.02"},
      {"lda.lookahead", "2"},
      {"lda.estimator", "final"},
      {"lda.burn_in", "0"},
      {"embed.dim", "300"},
      {"embed.negatives", "5"},
      {"embed.epochs", "5"},
      {"embed.lr", "0.025"},
      {"embed.min_count", "5"},
      {"embed.subsample", "0"},
      {"embed.text", "false"},
      {"similar.query", ""},
      {"similar.k", "10"},
      {"battles.k", "10"},
      {"battles.roster", ""},
      {"battles.lexicon", ""},
      {"battles.outcomes", ""},
  };
  for (const auto& [key, value] : defaults) kv[key] = value;
  return kv;
}

struct PipelineConfig {
  KeyValues values;  // effective key-values (defaults <- file <- flags)
  std::filesystem::path input;
  std::filesystem::path out;
  std::size_t threads = 1;
  PhaseSchedule schedule = PhaseSchedule::lok_sabha_2019();
  std::uint64_t seed_events = 0;
  std::uint64_t seed_lda = 0;
  std::uint64_t seed_embed = 0;
  std::size_t trend_n = 50;
  std::uint64_t event_threshold = kDefaultEventThreshold;
  std::string event_hashtag;
  std::vector<std::size_t> k_grid;
  SweepConfig lda;
  std::size_t min_tags = kMinDocumentTags;
  std::uint64_t vocab_floor = 1;
  double rel_eps = 0.02;
  std::size_t lookahead = 2;
  EmbeddingConfig embed;
  bool vectors_text = false;
  std::string similar_query;
  std::size_t similar_k = 10;
  std::size_t battle_k = 10;
  std::filesystem::path roster;
  std::filesystem::path lexicon;
  std::filesystem::path outcomes;

  std::string hash() const { return hex64(fnv1a64(format_key_values(values))); }

  static PipelineConfig from_key_values(const KeyValues& overrides) {
    KeyValues kv = default_key_values();
    for (const auto& [key, value] : overrides) {
      const bool known = kv.contains(key) || key.rfind("seed.", 0) == 0;
      if (!known) throw UsageError("unknown configuration key '" + key + "'");
      kv[key] = value;
    }
    const auto text = [&](const std::string& key) { return kv.at(key); };
    const auto integer = [&](const std::string& key) -> std::uint64_t {
      const auto& v = kv.at(key);
      std::uint64_t out = 0;
      const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
      if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        throw UsageError(key + " must be a non-negative integer, got '" + v + "'");
      return out;
    };
    const auto real = [&](const std::string& key) -> double {
      const auto& v = kv.at(key);
      double out = 0;
      const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
      if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        throw UsageError(key + " must be a number, got '" + v + "'");
      return out;
    };
    const auto boolean = [&](const std::string& key) {
      const auto& v = kv.at(key);
      if (v == "true" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "0" || v == "no") return false;
      throw UsageError(key + " must be true or false, got '" + v + "'");
    };
    const auto stage_seed = [&](const std::string& stage) {
      const std::string key = "seed." + stage;
      if (!kv.contains(key)) kv[key] = kv.at("seed");
      return integer(key);
    };

    PipelineConfig c;
    c.input = text("input");
    c.out = text("out");
    if (c.out.empty()) throw UsageError("out must name a directory");
    c.threads = std::max<std::uint64_t>(integer("threads"), 1);
    try {
      c.schedule = PhaseSchedule::from_config(kv);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    c.seed_events = stage_seed("events");
    c.seed_lda = stage_seed("lda");
    c.seed_embed = stage_seed("embed");
    c.trend_n = integer("trends.n");
    if (c.trend_n == 0) throw UsageError("trends.n must be at least 1");
    c.event_threshold = integer("events.threshold");
    c.event_hashtag = text("events.hashtag");

    try {
      c.k_grid = hashscope::k_grid(integer("lda.kmin"), integer("lda.kmax"), integer("lda.kstep"));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (text("lda.alpha") != "auto") {
      c.lda.lda.alpha = real("lda.alpha");
      if (!(*c.lda.lda.alpha > 0)) throw UsageError("lda.alpha must be positive or 'auto'");
    }
    c.lda.lda.beta = real("lda.beta");
    if (!(c.lda.lda.beta > 0)) throw UsageError("lda.beta must be positive");
    c.lda.lda.sweeps = integer("lda.sweeps");
    if (c.lda.lda.sweeps == 0) throw UsageError("lda.sweeps must be at least 1");
    c.lda.lda.seed = c.seed_lda;
    c.lda.lda.burn_in = integer("lda.burn_in");
    const auto estimator = text("lda.estimator");
    if (estimator == "final") c.lda.lda.estimator = LdaEstimator::final_state;
    else if (estimator == "mean") c.lda.lda.estimator = LdaEstimator::posterior_mean;
    else throw UsageError("lda.estimator must be 'final' or 'mean'");
    c.lda.coherence_top_m = integer("lda.top_m");
    if (c.lda.coherence_top_m < 2) throw UsageError("lda.top_m must be at least 2");
    c.lda.threads = c.threads;
    c.min_tags = integer("lda.min_tags");
    if (c.min_tags == 0) throw UsageError("lda.min_tags must be at least 1");
    c.vocab_floor = std::max<std::uint64_t>(integer("lda.vocab_floor"), 1);
    c.rel_eps = real("lda.rel_eps");
    c.lookahead = integer("lda.lookahead");

    c.embed.dim = integer("embed.dim");
    c.embed.negatives = integer("embed.negatives");
    c.embed.epochs = integer("embed.epochs");
    c.embed.initial_lr = real("embed.lr");
    c.embed.min_count = integer("embed.min_count");
    c.embed.subsample = real("embed.subsample");
    c.embed.seed = c.seed_embed;
    c.embed.threads = c.threads;
    try {
      c.embed.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    c.vectors_text = boolean("embed.text");

    c.similar_query = text("similar.query");
    c.similar_k = integer("similar.k");
    c.battle_k = integer("battles.k");
    if (c.similar_k == 0 || c.battle_k == 0) throw UsageError("k must be at least 1");
    c.roster = text("battles.roster");
    c.lexicon = text("battles.lexicon");
    c.outcomes = text("battles.outcomes");
    c.values = std::move(kv);
    return c;
  }
};

/// Normalized corpus line as written by ingest; hashtags are taken as is.
inline TweetRecord read_normalized_record(std::string_view line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::malformed, e.what());
  }
  TweetRecord r;
  try {
    const auto ts = parse_rfc3339(doc.at("timestamp").get_ref<const std::string&>());
    if (!ts) throw Error(Errc::timestamp, "bad timestamp in normalized corpus");
    r.timestamp = *ts;
    r.text = doc.at("text").get<std::string>();
    r.hashtags = doc.at("hashtags").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::schema, e.what());
  }
  return r;
}

/// Input range over a normalized corpus file. Each begin() re-opens the
/// file, so the range can be walked more than once.
class RecordFile {
 public:
  explicit RecordFile(std::filesystem::path path) : path_(std::move(path)) {}

  class iterator {
   public:
    using iterator_concept = std::input_iterator_tag;
    using value_type = TweetRecord;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(std::istream* in) : in_(in) { advance(); }

    const TweetRecord& operator*() const { return current_; }
    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }
    friend bool operator==(const iterator& it, std::default_sentinel_t) { return it.in_ == nullptr; }

   private:
    void advance() {
      std::string line;
      while (in_ && std::getline(*in_, line)) {
        ++line_no_;
        if (line.empty()) continue;
        try {
          current_ = read_normalized_record(line);
        } catch (const Error& e) {
          throw Error(e.code(), "corpus line " + std::to_string(line_no_) + ": " + e.what());
        }
        return;
      }
      in_ = nullptr;
    }

    std::istream* in_ = nullptr;
    TweetRecord current_;
    std::size_t line_no_ = 0;
  };

  iterator begin() {
    stream_ = std::ifstream(path_);
    if (!stream_) throw Error(Errc::io, "cannot open " + path_.string());
    return iterator(&stream_);
  }
  std::default_sentinel_t end() const { return {}; }

 private:
  std::filesystem::path path_;
  std::ifstream stream_;
};

struct IngestResult {
  CorpusStats stats;
  std::uint64_t lines = 0;
  std::uint64_t blank = 0;
  std::map<std::string, std::uint64_t> skipped;  // by parse-error kind
  std::uint64_t dropped_without_hashtags = 0;
};

/// Parses `in` line by line (sharded across `threads`, output order equal
/// to input order), writes survivors to `out` as normalized JSON lines.
inline IngestResult ingest_stream(std::istream& in, std::ostream& out, std::size_t threads = 1,
                                  std::size_t chunk_lines = 65536) {
  IngestResult result;
  std::vector<CorpusAccumulator> accumulators(std::max<std::size_t>(threads, 1));
  std::vector<std::string> lines;
  struct Parsed {
    std::optional<TweetRecord> record;
    std::optional<Errc> error;
    bool blank = false;
  };
  std::vector<Parsed> parsed;
  std::vector<std::string> rendered;

  const auto parse_range = [&](std::size_t begin, std::size_t end, CorpusAccumulator& acc) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& slot = parsed[i];
      const std::string_view line = lines[i];
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
        slot.blank = true;
        continue;
      }
      try {
        auto record = parse_record(line);
        if (!record.hashtags.empty()) {
          acc.add(record);
          rendered[i] = to_json_line(record);
        }
        slot.record = std::move(record);
      } catch (const Error& e) {
        slot.error = e.code();
      }
    }
  };

  for (;;) {
    lines.clear();
    std::string line;
    while (lines.size() < chunk_lines && std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
    }
    if (lines.empty()) break;
    parsed.assign(lines.size(), Parsed{});
    rendered.assign(lines.size(), std::string{});
    if (accumulators.size() == 1) {
      parse_range(0, lines.size(), accumulators[0]);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < accumulators.size(); ++t) {
        const auto begin = lines.size() * t / accumulators.size();
        const auto end = lines.size() * (t + 1) / accumulators.size();
        pool.emplace_back([&, begin, end, t] { parse_range(begin, end, accumulators[t]); });
      }
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      ++result.lines;
      const auto& slot = parsed[i];
      if (slot.blank) {
        ++result.blank;
      } else if (slot.error) {
        ++result.skipped[std::string(errc_name(*slot.error))];
      } else if (slot.record->hashtags.empty()) {
        ++result.dropped_without_hashtags;
      } else {
        out << rendered[i] << '\n';
      }
    }
  }
  for (std::size_t t = 1; t < accumulators.size(); ++t) accumulators[0].merge(accumulators[t]);
  result.stats = accumulators[0].stats();
  return result;
}

inline nlohmann::ordered_json stats_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["total_tweets"] = s.total_tweets;
  j["total_hashtags"] = s.total_hashtags;
  j["unique_hashtags"] = s.unique_hashtags;
  j["min_per_tweet"] = s.min_per_tweet;
  j["max_per_tweet"] = s.max_per_tweet;
  j["mean_per_tweet"] = s.mean_per_tweet;
  j["mean_defined"] = s.mean_defined;
  return j;
}

/// Everything one CLI invocation needs besides the configuration.
struct RunContext {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

namespace detail {

namespace fs = std::filesystem;

struct MissingPrerequisite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path))
    throw MissingPrerequisite("missing " + path.string() + "; run `hashscope " + std::string(producer) + "` first");
}

inline void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot write " + path.string());
  f << contents;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class Stage {
 public:
  Stage(const PipelineConfig& config, std::string name) : config_(config), name_(std::move(name)) {}

  fs::path path(const std::string& file) const { return config_.out / file; }

  fs::path output(const std::string& file) {
    outputs_.push_back(file);
    return path(file);
  }
  void input(const std::string& what) { inputs_.push_back(what); }

  /// Writes <stage>.conf and updates this stage's manifest entry.
  void finish() {
    const auto conf_name = name_ + ".conf";
    write_file(path(conf_name), format_key_values(config_.values));
    nlohmann::ordered_json manifest;
    const auto manifest_path = path("manifest.json");
    if (fs::exists(manifest_path)) {
      try {
        manifest = nlohmann::ordered_json::parse(read_file(manifest_path));
      } catch (const nlohmann::json::exception&) {
        manifest = nlohmann::ordered_json{};
      }
    }
    manifest["format"] = kManifestFormat;
    manifest["version"] = kVersion;
    nlohmann::ordered_json entry;
    entry["config_hash"] = config_.hash();
    entry["config_file"] = conf_name;
    entry["inputs"] = inputs_;
    std::sort(outputs_.begin(), outputs_.end());
    entry["outputs"] = outputs_;
    auto stages = manifest.contains("stages") ? manifest["stages"] : nlohmann::ordered_json::object();
    stages[name_] = entry;
    nlohmann::ordered_json sorted = nlohmann::ordered_json::object();
    std::vector<std::string> names;
    for (const auto& [key, value] : stages.items()) names.push_back(key);
    std::sort(names.begin(), names.end());
    for (const auto& n : names) sorted[n] = stages[n];
    manifest["stages"] = sorted;
    write_file(manifest_path, manifest.dump(2) + "\n");
  }

 private:
  const PipelineConfig& config_;
  std::string name_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

inline fs::path corpus_path(const PipelineConfig& c) { return c.out / "corpus.jsonl"; }
inline fs::path vectors_path(const PipelineConfig& c) { return c.out / "vectors.bin"; }

inline void run_ingest(const PipelineConfig& c, RunContext& ctx) {
  if (c.input.empty()) throw UsageError("ingest needs --input");
  if (!fs::exists(c.input)) throw UsageError("input file " + c.input.string() + " does not exist");
  Stage stage(c, "ingest");
  stage.input(c.input.string());
  std::ifstream in(c.input, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + c.input.string());
  std::ofstream out(stage.output("corpus.jsonl"), std::ios::binary);
  const auto result = ingest_stream(in, out, c.threads);
  out.close();

  auto j = stats_json(result.stats);
  j["lines_read"] = result.lines;
  j["blank_lines"] = result.blank;
  std::uint64_t skipped = 0;
  nlohmann::ordered_json by_kind = nlohmann::ordered_json::object();
  for (const auto& [kind, n] : result.skipped) {
    by_kind[kind] = n;
    skipped += n;
  }
  j["skipped_lines"] = skipped;
  j["skipped_by_kind"] = by_kind;
  j["dropped_without_hashtags"] = result.dropped_without_hashtags;
  write_file(stage.output("ingest_stats.json"), j.dump(2) + "\n");
  stage.finish();
  ctx.err << "ingest: " << result.stats.total_tweets << " tweets kept, " << result.dropped_without_hashtags
          << " without hashtags, " << skipped << " lines skipped\n";
}

inline std::string histogram_csv(const Histogram& h, std::string_view key_column) {
  auto buckets = h.buckets;
  std::stable_sort(buckets.begin(), buckets.end(),
                   [](const auto& a, const auto& b) { return a.count != b.count ? a.count > b.count : a.value < b.value; });
  std::string out = std::string(key_column) + ",count,share\n";
  for (const auto& b : buckets) out += b.label() + "," + std::to_string(b.count) + "," + csv::number(b.share) + "\n";
  return out;
}

inline void run_stats(const PipelineConfig& c, RunContext& ctx) {
  require(corpus_path(c), "ingest");
  Stage stage(c, "stats");
  stage.input("corpus.jsonl");
  RecordFile records(corpus_path(c));
  FrequencyTable table;
  for (const auto& r : records)
    for (const auto& tag : r.hashtags) table.add(tag);
  const auto per_phase = per_tweet_histogram(records, c.schedule);

  std::string freq = "hashtag,count\n";
  for (const auto& [token, n] : table.sorted()) freq += csv::field(token) + "," + std::to_string(n) + "\n";
  write_file(stage.output("freq.csv"), freq);

  nlohmann::ordered_json summary;
  if (!table.empty()) {
    const auto dist = share_count_distribution(table);
    auto buckets = dist.buckets;
    std::stable_sort(buckets.begin(), buckets.end(),
                     [](const auto& a, const auto& b) { return a.count != b.count ? a.count > b.count : a.value < b.value; });
    std::string share = "shares,hashtag_count,log10_shares,log10_hashtag_count\n";
    for (const auto& b : buckets)
      share += std::to_string(b.value) + "," + std::to_string(b.count) + "," +
               csv::number(std::log10(static_cast<double>(b.value))) + "," +
               csv::number(std::log10(static_cast<double>(b.count))) + "\n";
    write_file(stage.output("sharedist.csv"), share);
    try {
      summary["powerlaw_slope"] = powerlaw_slope(dist);
    } catch (const Error&) {
      summary["powerlaw_slope"] = nullptr;
    }
  } else {
    write_file(stage.output("sharedist.csv"), "shares,hashtag_count,log10_shares,log10_hashtag_count\n");
    summary["powerlaw_slope"] = nullptr;
  }
  for (int n = 1; n <= static_cast<int>(kVotingPhases); ++n) {
    const auto it = per_phase.find(voting_phase(n));
    const auto body = it == per_phase.end() ? std::string("k,count,share\n") : histogram_csv(it->second, "k");
    write_file(stage.output("pertweet_phase" + std::to_string(n) + ".csv"), body);
  }
  summary["unique_hashtags"] = table.size();
  summary["total_hashtags"] = table.total();
  write_file(stage.output("stats_summary.json"), summary.dump(2) + "\n");
  stage.finish();
  ctx.err << "stats: " << table.size() << " distinct hashtags\n";
}

inline std::string trends_csv(const TrendList& list) {
  std::string out = "rank,hashtag,count,weight\n";
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    const auto& e = list.entries[i];
    out += std::to_string(i + 1) + "," + csv::field(e.hashtag) + "," + std::to_string(e.count) + "," +
           csv::number(e.weight) + "\n";
  }
  return out;
}

inline void run_trends(const PipelineConfig& c, RunContext& ctx) {
  require(corpus_path(c), "ingest");
  Stage stage(c, "trends");
  stage.input("corpus.jsonl");
  RecordFile records(corpus_path(c));
  const auto per_phase = count_hashtags_by_phase(records, c.schedule);
  FrequencyTable overall_table;
  for (const auto& [phase, table] : per_phase) overall_table.merge(table);
  const auto overall = top_hashtags(overall_table, c.trend_n);
  const auto phases = phase_trends(per_phase, overall, c.trend_n);
  write_file(stage.output("trends_all.csv"), trends_csv(overall));
  for (int n = 1; n <= static_cast<int>(kVotingPhases); ++n) {
    const auto it = phases.find(voting_phase(n));
    write_file(stage.output("trends_phase" + std::to_string(n) + ".csv"),
               it == phases.end() ? trends_csv(TrendList{voting_phase(n), {}}) : trends_csv(it->second));
  }
  stage.finish();
  ctx.err << "trends: top " << overall.entries.size() << " overall\n";
}

inline nlohmann::ordered_json event_json(const EventPick& pick) {
  nlohmann::ordered_json j;
  j["hashtag"] = pick.hashtag;
  j["timestamp"] = format_utc(pick.tweet.timestamp);
  j["text"] = pick.tweet.text;
  j["pool_size"] = pick.candidate_pool_size;
  j["seed"] = pick.seed;
  return j;
}

inline void run_events(const PipelineConfig& c, RunContext& ctx) {
  require(corpus_path(c), "ingest");
  Stage stage(c, "events");
  stage.input("corpus.jsonl");
  RecordFile records(corpus_path(c));
  const auto table = count_hashtags(records);
  const auto eligible = eligible_hashtags(table, c.event_threshold);
  std::vector<std::string> queries;
  if (!c.event_hashtag.empty()) {
    const auto query = normalize_hashtag(c.event_hashtag);
    if (!query) throw UsageError("events.hashtag '" + c.event_hashtag + "' is not a hashtag");
    if (std::find(eligible.begin(), eligible.end(), *query) == eligible.end())
      throw Error(Errc::no_eligible_tweet, "#" + *query + " is shared " + std::to_string(table.count(*query)) +
                                               " times, not more than the threshold " +
                                               std::to_string(c.event_threshold));
    queries.push_back(*query);
  } else {
    queries = eligible;
  }
  std::string lines;
  for (const auto& q : queries) {
    try {
      const auto pick = pick_event(q, records, c.seed_events);
      const auto line = event_json(pick).dump();
      ctx.out << line << '\n';
      lines += line + '\n';
    } catch (const Error& e) {
      if (e.code() != Errc::no_eligible_tweet || !c.event_hashtag.empty()) throw;
      ctx.err << "events: skipping #" << q << " (" << e.what() << ")\n";
    }
  }
  write_file(stage.output("events.jsonl"), lines);
  stage.finish();
}

inline std::string topics_text(const LdaModel& model, const Vocabulary& vocab, std::size_t m) {
  std::string out;
  for (std::size_t t = 0; t < model.topics; ++t) {
    out += "topic " + std::to_string(t) + ":";
    for (const auto& [token, phi] : topic_top_words(model, vocab, t, m)) out += " " + token + ":" + csv::number(phi);
    out += "\n";
  }
  return out;
}

inline void run_topics(const PipelineConfig& c, RunContext& ctx) {
  require(corpus_path(c), "ingest");
  Stage stage(c, "topics");
  stage.input("corpus.jsonl");
  RecordFile records(corpus_path(c));
  const auto docs = build_documents(records, c.min_tags, c.vocab_floor);
  const auto results = sweep_k(docs.documents, docs.vocabulary, c.k_grid, c.lda);
  const auto curve = to_curve(results);

  std::string coherence_csv = "K,coherence\n";
  for (const auto& p : curve) coherence_csv += std::to_string(p.k) + "," + csv::number(p.coherence) + "\n";
  write_file(stage.output("coherence.csv"), coherence_csv);
  for (const auto& r : results)
    write_file(stage.output("topics_k" + std::to_string(r.k) + ".txt"), topics_text(r.model, docs.vocabulary, 10));

  KSelection chosen;
  if (curve.size() >= c.lookahead + 1) {
    chosen = select_k(curve, c.rel_eps, c.lookahead);
  } else {
    chosen = {std::max_element(curve.begin(), curve.end(),
                               [](const auto& a, const auto& b) { return a.coherence < b.coherence; })
                  ->k,
              false};
  }
  if (!chosen.converged) ctx.err << "topics: warning: coherence never levels off; using the argmax K\n";
  const auto& best = *std::find_if(results.begin(), results.end(), [&](const auto& r) { return r.k == chosen.k; });
  std::ostringstream model_text;
  save_lda(model_text, best.model, docs.vocabulary);
  write_file(stage.output("lda.hslda"), model_text.str());

  nlohmann::ordered_json selection;
  selection["documents"] = docs.documents.size();
  selection["vocabulary"] = docs.vocabulary.size();
  selection["chosen_k"] = chosen.k;
  selection["converged"] = chosen.converged;
  write_file(stage.output("topics_selection.json"), selection.dump(2) + "\n");
  stage.finish();
  ctx.out << "chosen K = " << chosen.k << (chosen.converged ? "" : " (argmax fallback)") << '\n';
}

inline void run_embed(const PipelineConfig& c, RunContext& ctx) {
  require(corpus_path(c), "ingest");
  Stage stage(c, "embed");
  stage.input("corpus.jsonl");
  RecordFile records(corpus_path(c));
  const auto tags = [](const TweetRecord& r) -> const std::vector<std::string>& { return r.hashtags; };
  const auto vocab = build_vocab(records | std::views::transform(tags), c.embed.min_count);
  const auto encoded = encode_sentences(records | std::views::transform(tags), vocab.vocab);
  const auto matrix = train_skipgram(encoded, vocab, c.embed);
  {
    std::ofstream f(stage.output("vectors.bin"), std::ios::binary);
    save_vectors_binary(f, matrix);
  }
  if (c.vectors_text) {
    std::ofstream f(stage.output("vectors.txt"), std::ios::binary);
    save_vectors_text(f, matrix);
  }
  stage.finish();
  ctx.err << "embed: " << matrix.size() << " vectors of dimension " << matrix.dim() << "\n";
}

inline EmbeddingMatrix load_vectors(const PipelineConfig& c) {
  std::ifstream f(vectors_path(c), std::ios::binary);
  return load_vectors_binary(f);
}

inline void run_similar(const PipelineConfig& c, RunContext& ctx) {
  if (c.similar_query.empty()) throw UsageError("similar needs --query");
  require(vectors_path(c), "embed");
  const auto query = normalize_hashtag(c.similar_query);
  if (!query) throw UsageError("'" + c.similar_query + "' is not a hashtag");
  const auto matrix = load_vectors(c);
  nlohmann::ordered_json j;
  j["query"] = *query;
  j["neighbors"] = nlohmann::ordered_json::array();
  for (const auto& [token, sim] : most_similar(matrix, *query, c.similar_k))
    j["neighbors"].push_back({{"hashtag", token}, {"similarity", sim}});
  ctx.out << j.dump() << '\n';
}

inline std::map<std::string, std::string> read_outcomes(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos) throw UsageError("outcomes lines must be battle_hashtag<TAB>winner name");
    const auto hashtag = normalize_hashtag(detail::trim(t.substr(0, tab)));
    if (!hashtag) throw UsageError("bad battle hashtag in outcomes file");
    out[*hashtag] = std::string(detail::trim(t.substr(tab + 1)));
  }
  return out;
}

inline nlohmann::ordered_json candidate_json(const CandidateReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["anchor"] = r.anchor;
  j["hashtags"] = nlohmann::ordered_json::array();
  for (const auto& h : r.similar_hashtags)
    j["hashtags"].push_back({{"token", h.token}, {"count", h.count}, {"label", sentiment_name(h.label)}});
  j["n"] = r.n;
  j["x"] = r.x;
  j["y"] = r.y;
  j["popularity"] = r.popularity;
  j["influence"] = r.influence;
  return j;
}

inline void run_battles(const PipelineConfig& c, RunContext& ctx) {
  require(corpus_path(c), "ingest");
  require(vectors_path(c), "embed");
  if (c.lexicon.empty()) throw UsageError("battles needs --lexicon");
  if (!fs::exists(c.lexicon)) throw UsageError("lexicon " + c.lexicon.string() + " does not exist");
  if (!c.roster.empty() && !fs::exists(c.roster)) throw UsageError("roster " + c.roster.string() + " does not exist");
  Stage stage(c, "battles");
  stage.input("corpus.jsonl");
  stage.input("vectors.bin");

  std::vector<std::string> roster;
  if (!c.roster.empty()) {
    std::istringstream in(read_file(c.roster));
    roster = read_roster(in);
    stage.input(c.roster.string());
  }
  SentimentLexicon lexicon;
  {
    std::istringstream in(read_file(c.lexicon));
    try {
      lexicon = SentimentLexicon::parse_tsv(in);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    stage.input(c.lexicon.string());
  }
  std::map<std::string, std::string> outcomes;
  if (!c.outcomes.empty()) {
    outcomes = read_outcomes(c.outcomes);
    stage.input(c.outcomes.string());
  }

  RecordFile records(corpus_path(c));
  const auto table = count_hashtags(records);
  const auto matrix = load_vectors(c);
  auto battles = find_battle_hashtags(table, roster);

  std::string candidates_csv = "battle_hashtag,count,candidate_a,candidate_b,confirmed\n";
  for (const auto& b : battles)
    candidates_csv += csv::field(b.battle_hashtag) + "," + std::to_string(table.count(b.battle_hashtag)) + "," +
                      csv::field(b.candidate_a) + "," + csv::field(b.candidate_b) + "," +
                      (b.confirmed ? "true" : "false") + "\n";
  write_file(stage.output("battle_candidates.csv"), candidates_csv);

  std::string reports;
  std::string plot_csv = "candidate,popularity,positive_share,negative_share,influence,battle_hashtag\n";
  std::size_t scored = 0;
  for (auto& battle : battles) {
    if (!battle.confirmed) continue;
    if (const auto it = outcomes.find(battle.battle_hashtag); it != outcomes.end()) {
      if (name_key(it->second) == name_key(battle.candidate_a)) battle.outcome = Side::a;
      else if (name_key(it->second) == name_key(battle.candidate_b)) battle.outcome = Side::b;
    }
    nlohmann::ordered_json j;
    j["battle_hashtag"] = battle.battle_hashtag;
    j["candidates"] = {battle.candidate_a, battle.candidate_b};
    try {
      const auto report = score_battle(matrix, battle, table, lexicon, c.battle_k);
      j["per_candidate"] = {candidate_json(report.candidates[0]), candidate_json(report.candidates[1])};
      j["predicted_winner"] = report.predicted_winner == Winner::tie
                                  ? std::string("tie")
                                  : report.candidates[report.predicted_winner == Winner::a ? 0 : 1].name;
      if (battle.outcome) {
        j["actual_winner"] = report.candidates[*battle.outcome == Side::a ? 0 : 1].name;
        j["prediction_correct"] = static_cast<int>(*battle.outcome) == static_cast<int>(report.predicted_winner);
      }
      for (const auto& cand : report.candidates) {
        plot_csv += csv::field(cand.name) + "," + std::to_string(cand.popularity) + "," +
                    csv::number(cand.positive_share()) + "," + csv::number(cand.negative_share()) + "," +
                    std::to_string(cand.influence) + "," + csv::field(battle.battle_hashtag) + "\n";
        for (const auto& missing : cand.missing)
          ctx.err << "battles: warning: #" << missing << " not found in the corpus counts\n";
      }
      ++scored;
    } catch (const Error& e) {
      if (e.code() != Errc::oov_battle) throw;
      j["error"] = e.what();
      ctx.err << "battles: skipping #" << battle.battle_hashtag << " (" << e.what() << ")\n";
    }
    const auto line = j.dump();
    reports += line + "\n";
    ctx.out << line << '\n';
  }
  write_file(stage.output("battles.jsonl"), reports);
  write_file(stage.output("battles.csv"), plot_csv);
  stage.finish();
  ctx.err << "battles: " << battles.size() << " candidate hashtags, " << scored << " scored\n";
}

inline void run_report(const PipelineConfig& c, RunContext& ctx) {
  require(c.out / "manifest.json", "ingest");
  const auto manifest = nlohmann::ordered_json::parse(read_file(c.out / "manifest.json"));
  nlohmann::ordered_json report;
  report["format"] = "hashscope-report/1";
  report["versions"] = {{"hashscope", kVersion},       {"corpus", kCorpusFormat}, {"lda", kLdaMagic},
                        {"vectors", kVectorMagic},     {"manifest", kManifestFormat}, {"csv", kCsvFormat}};
  report["config_hash"] = c.hash();
  report["manifest"] = manifest;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(c.out)) {
    const auto name = entry.path().filename().string();
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && name != "report.json" &&
        (ext == ".csv" || ext == ".json" || ext == ".jsonl" || ext == ".txt" || ext == ".hslda" || ext == ".bin" ||
         ext == ".conf"))
      names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  report["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& name : names) {
    const auto bytes = read_file(c.out / name);
    report["artifacts"].push_back({{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  write_file(c.out / "report.json", report.dump(2) + "\n");
  ctx.err << "report: " << names.size() << " artifacts\n";
}

}  // namespace detail

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"ingest", "stats",  "trends",  "events", "topics",
                                              "embed",  "similar", "battles", "report", "all"};
  return names;
}

/// Runs one subcommand. Returns the process exit status: 0 success,
/// 1 data error, 2 usage/config error or missing prerequisite.
inline int run(const std::string& subcommand, const PipelineConfig& config, RunContext ctx = {}) {
  namespace fs = std::filesystem;
  try {
    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
      throw UsageError("unknown subcommand '" + subcommand + "'");
    // input files are checked up front so `all` does not stop half way
    const auto must_exist = [](const fs::path& path, const char* what) {
      if (!path.empty() && !fs::is_regular_file(path))
        throw UsageError(std::string(what) + " " + path.string() + " does not exist");
    };
    if (subcommand == "ingest" || subcommand == "all") {
      if (config.input.empty()) throw UsageError(subcommand + " needs --input");
      must_exist(config.input, "input file");
    }
    if (subcommand == "battles" || subcommand == "all") {
      must_exist(config.roster, "roster");
      must_exist(config.lexicon, "lexicon");
      must_exist(config.outcomes, "outcomes");
    }
    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec || !fs::is_directory(config.out)) throw UsageError("cannot create output directory " + config.out.string());

    if (subcommand == "ingest") detail::run_ingest(config, ctx);
    else if (subcommand == "stats") detail::run_stats(config, ctx);
    else if (subcommand == "trends") detail::run_trends(config, ctx);
    else if (subcommand == "events") detail::run_events(config, ctx);
    else if (subcommand == "topics") detail::run_topics(config, ctx);
    else if (subcommand == "embed") detail::run_embed(config, ctx);
    else if (subcommand == "similar") detail::run_similar(config, ctx);
    else if (subcommand == "battles") detail::run_battles(config, ctx);
    else if (subcommand == "report") detail::run_report(config, ctx);
    else {
      detail::run_ingest(config, ctx);
      detail::run_stats(config, ctx);
      detail::run_trends(config, ctx);
      if (!config.event_hashtag.empty() || config.event_threshold > 0) detail::run_events(config, ctx);
      detail::run_topics(config, ctx);
      detail::run_embed(config, ctx);
      if (!config.lexicon.empty()) detail::run_battles(config, ctx);
      detail::run_report(config, ctx);
    }
    return 0;
  } catch (const detail::MissingPrerequisite& e) {
    ctx.err << "hashscope " << subcommand << ": " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    ctx.err << "hashscope " << subcommand << ": " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    ctx.err << "hashscope " << subcommand << ": " << e.what() << '\n';
    for (const auto& d : e.details()) ctx.err << "  " << d << '\n';
    return e.code() == Errc::config ? 2 : 1;
  }
}

}  // namespace hashscope
