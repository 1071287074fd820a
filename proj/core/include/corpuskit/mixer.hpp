#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpuskit/document.hpp"
#include "corpuskit/tokenizer.hpp"

namespace corpuskit {

struct MixEntry {
  Source source = Source::kCommonCrawl;
  std::uint64_t quantity_tokens = 0;
  double weight = 0.0;  // fraction of the training stream
  // Epoch count published alongside the weights, if any. Only used to check
  // the rows against each other.
  std::optional<double> reported_epochs;

  friend bool operator==(const MixEntry&, const MixEntry&) = default;
};

struct MixSpec {
  std::vector<MixEntry> entries;
  std::uint64_t total_training_tokens = 0;

  double weight_sum() const;
  const MixEntry* find(Source s) const;

  // Throws ConfigError on a negative weight, a zero quantity, a repeated
  // source, or a weight sum outside [0.99, 1.01].
  void validate() const;

  // {"total_training_tokens": T, "entries": [{"source", "quantity_tokens",
  //  "weight", "reported_epochs"?}, ...]}
  static MixSpec from_json(std::string_view text);
  static MixSpec load(const std::filesystem::path& path);
  std::string to_json() const;

  friend bool operator==(const MixSpec&, const MixSpec&) = default;
};

// epochs(s) = weight(s) * total_training_tokens / quantity_tokens(s).
// Throws ConfigError when the total is unset or a quantity is zero.
std::map<Source, double> compute_epochs(const MixSpec& spec);

enum class MixWarningKind { kWeightSum, kEpochCap, kZeroWeight, kInconsistentEpochs };

struct MixWarning {
  MixWarningKind kind;
  std::optional<Source> source;
  std::string message;
};

struct MixCheckOptions {
  double sum_tolerance = 0.005;
  double epoch_cap = 4.0;
  // Reported epochs imply a total T = epochs * quantity / weight per row;
  // rows disagreeing by more than this relative spread are flagged.
  double implied_total_tolerance = 0.05;
};

// Diagnostics for a mix. The epoch cap is only checked when the total is
// set. Throws ConfigError on a negative weight.
std::vector<MixWarning> validate_mix(const MixSpec& spec, const MixCheckOptions& options = {});

struct Draw {
  Source source;
  std::size_t index;  // position in that source's pool
  std::string doc_id;

  friend bool operator==(const Draw&, const Draw&) = default;
};

struct SampledStream {
  std::vector<Draw> draws;
  std::uint64_t seed = 0;
  std::map<Source, double> realized_weights;  // every source listed in the MixSpec
};

using SourcePools = std::map<Source, std::vector<Document>>;

// Draws sources i.i.d. from the renormalized weights. Inside a source the
// documents are emitted in shuffled epochs, a fresh permutation per epoch.
// Throws ConfigError when a positively weighted source has no documents.
SampledStream sample_stream(const SourcePools& pools, const MixSpec& spec, std::uint64_t seed,
                            std::size_t n_draws);

struct SourceMixStats {
  std::uint64_t draws = 0;
  std::uint64_t tokens = 0;
  double realized_weight = 0.0;  // share of draws
  double token_share = 0.0;      // share of tokens
  double mean_doc_len = 0.0;
};

struct MixReport {
  std::uint64_t draws = 0;
  std::uint64_t total_tokens = 0;
  std::map<Source, SourceMixStats> per_source;
  std::uint64_t bucket_width = 64;
  std::map<std::uint64_t, std::uint64_t> histogram;  // same bucketing as count_tokens

  std::string to_json() const;
};

MixReport mix_report(const SampledStream& stream, const SourcePools& pools, const Tokenizer& tokenizer,
                     std::uint64_t bucket_width = 64, unsigned workers = 1);

// One {"source", "doc_id"} object per line, plus "<path>.manifest" holding
// the seed, the draw count and the realized weights.
void write_stream(const SampledStream& stream, const std::filesystem::path& path);

// Plain-text table with the columns quantity / weight / epochs / realized.
std::string format_mix_table(const MixSpec& spec, const SampledStream& stream);

}  // namespace corpuskit
