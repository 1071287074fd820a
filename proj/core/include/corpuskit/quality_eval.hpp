#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corpuskit/document.hpp"
#include "corpuskit/ngram_lm.hpp"

namespace corpuskit {

struct ProbeParams {
  unsigned order = 3;
  Smoothing smoothing = Smoothing::stupid_backoff(0.4);
  std::size_t sample_docs = 0;  // 0 trains on the whole corpus
  std::uint64_t seed = 1;
  double tie_tolerance = 0.001;  // relative PPL difference treated as a tie
  unsigned workers = 1;
};

enum class Better { kA, kB, kTie };

struct CompareVerdict {
  Better better = Better::kTie;
  double ppl_a = 0.0;
  double ppl_b = 0.0;
};

// Trains one probe per corpus with identical parameters and scores both on
// the dev set; lower perplexity wins.
CompareVerdict compare_configs(std::span<const std::string> corpus_a, std::span<const std::string> corpus_b,
                               std::span<const std::string> dev, const ProbeParams& params);

// Probe perplexity of a single corpus (sampled as in compare_configs).
double probe_perplexity(std::span<const std::string> corpus, std::span<const std::string> dev,
                        const ProbeParams& params);

// Seeded uniform sample of `n` distinct indices from [0, size). n == size
// gives a permutation. Throws ConfigError when n > size.
std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed);

struct ReviewItem {
  std::string doc_id;
  Source source = Source::kCommonCrawl;
  std::string excerpt;  // at most 500 characters
};

std::vector<ReviewItem> sample_for_manual_review(std::span<const Document> corpus, std::size_t n,
                                                 std::uint64_t seed);

// JSON lines with empty rubric fields: smoothness (1-5) and the
// advertisement / repeated_short_sentences / spam flags.
void write_review_file(const std::filesystem::path& path, std::span<const ReviewItem> items);

}  // namespace corpuskit
