// hashscope command-line front end. Option parsing only; the stages live in
// hashscope/pipeline.hpp.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hashscope/pipeline.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags shared by every subcommand.
constexpr FlagSpec kGlobalFlags[] = {
    {"--input", "input", "raw JSONL input (ingest)"},
    {"--out", "out", "output directory"},
    {"--threads", "threads", "worker threads"},
    {"--seed", "seed", "default seed for every randomized stage"},
};

constexpr FlagSpec kTrendsFlags[] = {{"-n,--top", "trends.n", "hashtags per list"}};
constexpr FlagSpec kEventsFlags[] = {
    {"--hashtag", "events.hashtag", "pick for this hashtag only"},
    {"--threshold", "events.threshold", "minimum share count (exclusive)"},
    {"--event-seed", "seed.events", "seed for the event pick"},
};
constexpr FlagSpec kTopicsFlags[] = {
    {"--kmin", "lda.kmin", ""},         {"--kmax", "lda.kmax", ""},
    {"--kstep", "lda.kstep", ""},       {"--alpha", "lda.alpha", "Dirichlet prior on topics, or 'auto' (50/K)"},
    {"--beta", "lda.beta", ""},         {"--sweeps", "lda.sweeps", "Gibbs sweeps per K"},
    {"--min-tags", "lda.min_tags", "minimum hashtags per document"},
    {"--top-m", "lda.top_m", "words per topic for coherence"},
    {"--estimator", "lda.estimator", "final or mean"},
    {"--lda-seed", "seed.lda", ""},
};
constexpr FlagSpec kEmbedFlags[] = {
    {"--dim", "embed.dim", ""},           {"--negatives", "embed.negatives", ""},
    {"--epochs", "embed.epochs", ""},     {"--lr", "embed.lr", "initial learning rate"},
    {"--min-count", "embed.min_count", ""}, {"--subsample", "embed.subsample", "0 disables"},
    {"--text", "embed.text", "also write vectors.txt (true/false)"},
    {"--embed-seed", "seed.embed", ""},
};
constexpr FlagSpec kSimilarFlags[] = {{"--query", "similar.query", "hashtag"}, {"-k", "similar.k", "neighbors"}};
constexpr FlagSpec kBattlesFlags[] = {
    {"--roster", "battles.roster", "candidate names, one per line"},
    {"--lexicon", "battles.lexicon", "hashtag<TAB>positive|negative|neutral"},
    {"--outcomes", "battles.outcomes", "battle_hashtag<TAB>winner"},
    {"-k", "battles.k", "neighbors per anchor"},
};

template <std::size_t N>
void add_flags(CLI::App& app, const FlagSpec (&flags)[N], hashscope::KeyValues& overrides) {
  for (const auto& f : flags) {
    const std::string key = f.key;
    app.add_option_function<std::string>(
        f.flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, f.help);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hashscope: hashtag analytics for election tweet corpora"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  hashscope::KeyValues overrides;
  std::string config_path;
  std::vector<std::string> sets;
  bool version = false;
  app.add_flag("--version", version, "print tool and format versions");
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--set", sets, "key=value override (repeatable)");
  add_flags(app, kGlobalFlags, overrides);

  std::map<std::string, CLI::App*> commands;
  const auto add = [&](const char* name, const char* help) { return commands[name] = app.add_subcommand(name, help); };
  add("ingest", "parse raw JSONL into the normalized corpus");
  add("stats", "frequency table, share-count distribution, per-tweet histograms");
  add_flags(*add("trends", "top hashtags overall and per phase"), kTrendsFlags, overrides);
  add_flags(*add("events", "pick a representative tweet for popular hashtags"), kEventsFlags, overrides);
  add_flags(*add("topics", "LDA over hashtag documents with a K sweep"), kTopicsFlags, overrides);
  add_flags(*add("embed", "train skip-gram hashtag vectors"), kEmbedFlags, overrides);
  add_flags(*add("similar", "nearest hashtags by cosine similarity"), kSimilarFlags, overrides);
  add_flags(*add("battles", "candidate battles: popularity and influence"), kBattlesFlags, overrides);
  add("report", "bundle outputs with the run manifest");
  auto* all = add("all", "run every stage in order (similar excepted)");
  add_flags(*all, kTrendsFlags, overrides);
  add_flags(*all, kEventsFlags, overrides);
  add_flags(*all, kTopicsFlags, overrides);
  add_flags(*all, kEmbedFlags, overrides);
  add_flags(*all, kBattlesFlags, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (version) {
    std::cout << hashscope::version_text();
    return 0;
  }
  std::string subcommand;
  for (const auto& [name, cmd] : commands)
    if (cmd->parsed()) subcommand = name;
  if (subcommand.empty()) {
    std::cerr << app.help();
    return 2;
  }

  hashscope::KeyValues values;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw hashscope::UsageError("cannot read config file " + config_path);
      std::ostringstream text;
      text << f.rdbuf();
      values = hashscope::parse_key_values(text.str());
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw hashscope::UsageError("--set expects key=value, got '" + s + "'");
      values[std::string(hashscope::detail::trim(s.substr(0, eq)))] = std::string(hashscope::detail::trim(s.substr(eq + 1)));
    }
    for (const auto& [k, v] : overrides) values[k] = v;
    const auto config = hashscope::PipelineConfig::from_key_values(values);
    return hashscope::run(subcommand, config);
  } catch (const hashscope::UsageError& e) {
    std::cerr << "hashscope: " << e.what() << '\n';
    return 2;
  } catch (const hashscope::Error& e) {
    std::cerr << "hashscope: " << e.what() << '\n';
    return 2;
  }
}
