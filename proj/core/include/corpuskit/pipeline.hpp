#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "corpuskit/classifier.hpp"
#include "corpuskit/cleaner.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/filters.hpp"
#include "corpuskit/ingest.hpp"
#include "corpuskit/mixer.hpp"
#include "corpuskit/quality_eval.hpp"
#include "corpuskit/tokenizer.hpp"

namespace corpuskit {

enum class PipelineStage { kIngest, kClean, kFilter, kDedup, kEval, kMix, kStats, kAll };

std::string_view pipeline_stage_name(PipelineStage s);
std::optional<PipelineStage> parse_pipeline_stage(std::string_view name);

// Raised when a stage finds no shards from the stage before it.
class MissingUpstreamError : public Error {
 public:
  using Error::Error;
};

struct InputSpec {
  Source source = Source::kCommonCrawl;
  std::vector<std::string> globs;  // relative to the config file
  // Set for labeled datasets: the fields concatenated into the text.
  std::vector<std::string> text_fields;
};

// A classifier either loaded from `model` or, when that file does not exist,
// trained from one-document-per-line text files.
struct ModelSpec {
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> train_positive;
  std::optional<std::filesystem::path> train_negative;
  TrainHyper hyper;
};

enum class TokenizerKind { kBpe, kChar };

struct PipelineConfig {
  std::filesystem::path base_dir;  // directory of the config file

  std::vector<InputSpec> inputs;
  std::filesystem::path output_dir = "out";
  std::size_t shard_size = 10000;
  ErrorPolicy on_error = ErrorPolicy::kSkip;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  CleanConfig clean;
  std::set<Source> clean_sources = {Source::kCommonCrawl};

  std::optional<std::filesystem::path> sensitive_lexicon;  // bundled list when unset
  std::size_t sensitive_max_distinct = 3;
  std::set<Source> sensitive_sources = {Source::kCommonCrawl, Source::kEbooks};

  ModelSpec spam;
  double spam_threshold = 0.5;
  std::set<Source> spam_sources = {Source::kCommonCrawl, Source::kEbooks};

  ModelSpec quality;
  QualityOptions quality_options;
  std::set<Source> quality_sources = {Source::kCommonCrawl};

  DedupParams dedup;
  std::set<Source> dedup_sources = {kAllSources.begin(), kAllSources.end()};

  std::optional<std::filesystem::path> dev_set;  // one document per line
  ProbeParams probe;
  std::size_t review_samples = 0;

  std::optional<std::filesystem::path> mix_spec;
  std::size_t mix_draws = 10000;
  MixCheckOptions mix_check;

  TokenizerKind tokenizer = TokenizerKind::kBpe;
  std::optional<std::filesystem::path> tokenizer_model;  // trained on the corpus when absent
  std::size_t tokenizer_vocab = 2000;
  std::uint64_t bucket_width = 64;

  // Paths in the file are resolved against base_dir. Throws ConfigError.
  static PipelineConfig from_json(std::string_view text, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);

  // Applies the global seed to every stochastic component.
  void propagate_seed();
  // Throws ConfigError when a referenced file is missing.
  void check_files() const;

  std::filesystem::path stage_dir(PipelineStage s) const;
};

struct StageReport {
  std::string stage;
  std::uint64_t docs_in = 0;
  std::uint64_t docs_out = 0;
  std::map<std::string, std::uint64_t> drops;  // rule id -> documents
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  double wall_seconds = 0.0;
  double mb_per_s = 0.0;
  std::string details;  // stage-specific JSON object, "{}" when empty

  std::uint64_t total_drops() const;
  bool conserved() const { return docs_in == docs_out + total_drops(); }
};

struct RunReport {
  std::vector<StageReport> stages;

  const StageReport* find(std::string_view stage) const;
  // Timing fields are omitted when include_timing is false, which makes
  // reports of identical runs byte-identical.
  std::string to_json(bool include_timing = true) const;
  std::string to_text() const;
};

// Runs one stage (or all of them in order) and writes its outputs below
// config.output_dir. Throws MissingUpstreamError, ConfigError, IoError.
RunReport run_pipeline(PipelineStage stage, const PipelineConfig& config, std::ostream* log = nullptr);

struct SourceStats {
  std::uint64_t docs = 0;
  std::uint64_t bytes = 0;
  std::uint64_t tokens = 0;
  double mean_doc_len = 0.0;
  std::map<std::uint64_t, std::uint64_t> histogram;
};

struct CorpusStats {
  std::map<Source, SourceStats> per_source;
  SourceStats total;
  std::uint64_t bucket_width = 64;

  std::string to_json() const;
  std::string to_text() const;
};

// Per-source sizes, token totals and length histograms of a set of shards.
CorpusStats corpus_stats(std::span<const std::filesystem::path> shards, const Tokenizer& tokenizer,
                         std::uint64_t bucket_width = 64, unsigned workers = 1);

}  // namespace corpuskit
