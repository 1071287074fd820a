#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "corpuskit/error.hpp"
#include "corpuskit/pipeline.hpp"
#include "corpuskit/shard.hpp"
#include "oracles.hpp"

namespace ck = corpuskit;
namespace fs = std::filesystem;

namespace {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name) : path_(fs::temp_directory_path() / ("corpuskit_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// News documents only, so no classifier is needed; a third of them are copies.
void write_news(const fs::path& dir, std::size_t n) {
  std::mt19937_64 rng(5);
  std::string lines;
  std::string previous;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string text = (i % 3 == 2) ? previous : ck::testing::cjk_filler(rng, 80 + rng() % 300);
    lines += "{\"text\":\"" + text + "\"}\n";
    previous = text;
  }
  lines += "not json\n";
  write_file(dir / "raw" / "news.jsonl", lines);
}

ck::PipelineConfig news_config(const fs::path& dir, const std::string& extra = "") {
  const std::string text = R"({"seed": 3, "workers": 2,
    "io": {"shard_size": 16, "inputs": [{"source": "news", "globs": ["raw/*.jsonl"]}]},
    "tokenizer": {"kind": "char", "bucket_width": 32})" + extra + "}";
  write_file(dir / "pipeline.json", text);
  return ck::PipelineConfig::load(dir / "pipeline.json");
}

std::string stage_bytes(const fs::path& dir) {
  std::string all;
  for (const auto& shard : ck::list_shards(dir)) all += read_file(shard);
  return all;
}

}  // namespace

TEST(PipelineConfig, RejectsMalformedAndUnknownKeys) {
  EXPECT_THROW(ck::PipelineConfig::from_json("{", "."), ck::ConfigError);
  EXPECT_THROW(ck::PipelineConfig::from_json(R"({"sed": 1})", "."), ck::ConfigError);
  EXPECT_THROW(ck::PipelineConfig::from_json(R"({"dedup": {"bandz": 2}})", "."), ck::ConfigError);
  EXPECT_THROW(ck::PipelineConfig::from_json(R"({"io": {"on_error": "maybe"}})", "."), ck::ConfigError);
  EXPECT_THROW(ck::PipelineConfig::from_json(R"({"seed": "x"})", "."), ck::ConfigError);
  EXPECT_THROW(ck::PipelineConfig::load("/nonexistent/pipeline.json"), ck::Error);
}

TEST(PipelineConfig, PathsResolveAgainstConfigDirectory) {
  const auto cfg = ck::PipelineConfig::from_json(R"({"io": {"output_dir": "o"}, "mix": {"spec": "m.json"}})", "/base");
  EXPECT_EQ(cfg.output_dir, fs::path("/base/o"));
  EXPECT_EQ(cfg.mix_spec, fs::path("/base/m.json"));
  EXPECT_EQ(cfg.stage_dir(ck::PipelineStage::kDedup), fs::path("/base/o/dedup"));
  EXPECT_THROW(cfg.check_files(), ck::ConfigError);
}

TEST(PipelineConfig, SeedReachesEveryStochasticComponent) {
  auto a = ck::PipelineConfig::from_json(R"({"seed": 10})", ".");
  auto b = ck::PipelineConfig::from_json(R"({"seed": 11})", ".");
  a.propagate_seed();
  b.propagate_seed();
  EXPECT_NE(a.dedup.minhash.seed, b.dedup.minhash.seed);
  EXPECT_NE(a.probe.seed, b.probe.seed);
  EXPECT_NE(a.spam.hyper.seed, b.spam.hyper.seed);
  EXPECT_NE(a.quality.hyper.seed, b.quality.hyper.seed);
  EXPECT_NE(a.quality_options.seed, b.quality_options.seed);
}

TEST(Pipeline, EmptyInputGivesZeroedReport) {
  ScratchDir dir("empty");
  fs::create_directories(dir.path() / "raw");
  const auto cfg = news_config(dir.path());
  const auto report = ck::run_pipeline(ck::PipelineStage::kAll, cfg);
  ASSERT_EQ(report.stages.size(), 7u);
  for (const auto& s : report.stages) {
    EXPECT_EQ(s.docs_in, 0u) << s.stage;
    EXPECT_EQ(s.docs_out, 0u) << s.stage;
    EXPECT_EQ(s.total_drops(), 0u) << s.stage;
  }
}

TEST(Pipeline, MissingUpstreamIsReported) {
  ScratchDir dir("missing");
  write_news(dir.path(), 10);
  const auto cfg = news_config(dir.path());
  for (auto stage : {ck::PipelineStage::kClean, ck::PipelineStage::kFilter, ck::PipelineStage::kDedup,
                     ck::PipelineStage::kEval, ck::PipelineStage::kMix, ck::PipelineStage::kStats}) {
    EXPECT_THROW(ck::run_pipeline(stage, cfg), ck::MissingUpstreamError);
  }
  EXPECT_NO_THROW(ck::run_pipeline(ck::PipelineStage::kIngest, cfg));
  EXPECT_NO_THROW(ck::run_pipeline(ck::PipelineStage::kClean, cfg));
}

TEST(Pipeline, ConservationAtEveryStage) {
  ScratchDir dir("conserve");
  write_news(dir.path(), 90);
  const auto cfg = news_config(dir.path());
  const auto report = ck::run_pipeline(ck::PipelineStage::kAll, cfg);
  for (const auto& s : report.stages) EXPECT_TRUE(s.conserved()) << s.stage;
  EXPECT_EQ(report.find("ingest")->drops.at("malformed"), 1u);
  EXPECT_EQ(report.find("dedup")->drops.at("near_duplicate"), 30u);
  EXPECT_EQ(report.find("dedup")->docs_out, 60u);
}

TEST(Pipeline, StageIsolationReproducesOutput) {
  ScratchDir dir("isolation");
  write_news(dir.path(), 60);
  const auto cfg = news_config(dir.path());
  const auto first = ck::run_pipeline(ck::PipelineStage::kAll, cfg);
  const fs::path dedup_dir = cfg.stage_dir(ck::PipelineStage::kDedup);
  const std::string before = stage_bytes(dedup_dir);
  fs::remove_all(dedup_dir);
  fs::remove_all(cfg.output_dir / "cache");
  const auto again = ck::run_pipeline(ck::PipelineStage::kDedup, cfg);
  EXPECT_EQ(stage_bytes(dedup_dir), before);
  EXPECT_EQ(again.find("dedup")->drops, first.find("dedup")->drops);
}

TEST(Pipeline, RerunIsByteIdentical) {
  ScratchDir dir("rerun");
  write_news(dir.path(), 45);
  const auto cfg = news_config(dir.path());
  const auto a = ck::run_pipeline(ck::PipelineStage::kAll, cfg);
  const std::string shards = stage_bytes(cfg.stage_dir(ck::PipelineStage::kDedup));
  const auto b = ck::run_pipeline(ck::PipelineStage::kAll, cfg);
  EXPECT_EQ(stage_bytes(cfg.stage_dir(ck::PipelineStage::kDedup)), shards);
  EXPECT_EQ(a.to_json(false), b.to_json(false));
}

TEST(Pipeline, StatsMatchTokenCounts) {
  ScratchDir dir("stats");
  write_news(dir.path(), 40);
  const auto cfg = news_config(dir.path());
  ck::run_pipeline(ck::PipelineStage::kAll, cfg);
  const auto shards = ck::list_shards(cfg.stage_dir(ck::PipelineStage::kDedup));
  const ck::CharTokenizer tok;
  const auto stats = ck::corpus_stats(shards, tok, 32, 2);

  std::vector<std::string> texts;
  for (const auto& shard : shards) {
    for (auto& d : ck::read_shard(shard)) texts.push_back(std::move(d.text));
  }
  const auto counted = ck::count_tokens(texts, tok, 32);
  const auto& news = stats.per_source.at(ck::Source::kNews);
  EXPECT_EQ(news.docs, texts.size());
  EXPECT_EQ(news.tokens, counted.total);
  EXPECT_EQ(news.mean_doc_len, counted.mean_doc_len);
  EXPECT_EQ(news.histogram, counted.histogram);
  std::uint64_t bucketed = 0;
  for (const auto& [b, n] : stats.total.histogram) bucketed += n;
  EXPECT_EQ(bucketed, stats.total.docs);
  EXPECT_TRUE(fs::exists(cfg.stage_dir(ck::PipelineStage::kStats) / "stats.json"));
}

TEST(Pipeline, StageNames) {
  for (auto s : {ck::PipelineStage::kIngest, ck::PipelineStage::kMix, ck::PipelineStage::kAll}) {
    EXPECT_EQ(ck::parse_pipeline_stage(ck::pipeline_stage_name(s)), s);
  }
  EXPECT_FALSE(ck::parse_pipeline_stage("deploy"));
}
