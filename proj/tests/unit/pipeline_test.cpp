#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hashscope/pipeline.hpp"

using namespace hashscope;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hashscope_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

PipelineConfig config_for(const fs::path& out, KeyValues extra = {}) {
  extra["input"] = std::string(HASHSCOPE_DATA) + "/fixture_10k.jsonl";
  extra["out"] = out.string();
  extra["trends.n"] = "20";
  return PipelineConfig::from_key_values(extra);
}

struct Captured {
  int status;
  std::string out, err;
};

Captured run_captured(const std::string& sub, const PipelineConfig& c) {
  std::ostringstream out, err;
  const int status = run(sub, c, RunContext{out, err});
  return {status, out.str(), err.str()};
}

int cli(const std::string& args) {
  const auto status = std::system(("\"" + std::string(HASHSCOPE_CLI) + "\" " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, MissingPrerequisiteNamesProducer) {
  const auto dir = scratch("prereq");
  const auto r = run_captured("trends", config_for(dir));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("hashscope ingest"), std::string::npos) << r.err;
  const auto s = run_captured("similar", config_for(dir, {{"similar.query", "modi"}}));
  EXPECT_EQ(s.status, 2);
  EXPECT_NE(s.err.find("hashscope embed"), std::string::npos) << s.err;
}

TEST(Pipeline, ConfigErrors) {
  EXPECT_THROW(PipelineConfig::from_key_values({{"trends.nn", "3"}}), UsageError);
  EXPECT_THROW(PipelineConfig::from_key_values({{"trends.n", "many"}}), UsageError);
  EXPECT_THROW(PipelineConfig::from_key_values({{"phase.3", "2019-04-01"}}), UsageError);
  EXPECT_EQ(cli("stats --set bogus=1 --out /tmp"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  // paths are checked before anything runs
  const auto dir = scratch("paths");
  const auto r = run_captured("all", config_for(dir, {{"battles.lexicon", "/nonexistent/lexicon.tsv"}}));
  EXPECT_EQ(r.status, 2);
  EXPECT_FALSE(fs::exists(dir / "corpus.jsonl"));
}

TEST(Pipeline, DataErrorsExitOne) {
  const auto dir = scratch("data");
  fs::create_directories(dir);
  std::ofstream(dir / "corpus.jsonl") << "{\"timestamp\":\"2019-04-11T00:00:00Z\",\"text\":\"#a\",\"hashtags\":[\"a\"]}\n"
                                         "not json\n";
  const auto r = run_captured("stats", config_for(dir));
  EXPECT_EQ(r.status, 1) << r.err;
  EXPECT_NE(r.err.find("malformed"), std::string::npos) << r.err;
}

TEST(Pipeline, VersionListsFormats) {
  const auto v = version_text();
  for (const char* id : {"hashscope-corpus/1", "hashscope-manifest/1", "HSVEC1", "HSLDA1"})
    EXPECT_NE(v.find(id), std::string::npos) << id;
}

TEST(Pipeline, ManifestAndStageReplay) {
  const auto first = scratch("first");
  const auto config = config_for(first);
  for (const char* sub : {"ingest", "stats", "trends"}) ASSERT_EQ(run_captured(sub, config).status, 0) << sub;

  const auto manifest = nlohmann::json::parse(slurp(first / "manifest.json"));
  EXPECT_EQ(manifest["format"], "hashscope-manifest/1");
  for (const char* sub : {"ingest", "stats", "trends"})
    EXPECT_EQ(manifest["stages"][sub]["config_hash"], config.hash()) << sub;

  // replay each stage from its own conf into a fresh directory
  const auto second = scratch("second");
  for (const char* sub : {"ingest", "stats", "trends"}) {
    auto kv = parse_key_values(slurp(first / (std::string(sub) + ".conf")));
    kv["out"] = second.string();
    ASSERT_EQ(run_captured(sub, PipelineConfig::from_key_values(kv)).status, 0) << sub;
  }
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(first)) {
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".jsonl") continue;
    EXPECT_EQ(slurp(e.path()), slurp(second / e.path().filename())) << e.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 10u);
}
