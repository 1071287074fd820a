#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corpuskit {

enum class SmoothingKind : std::uint32_t { kAddK = 0, kStupidBackoff = 1, kUniform = 2 };

struct Smoothing {
  SmoothingKind kind = SmoothingKind::kStupidBackoff;
  double value = 0.4;  // k for add-k, the backoff factor for stupid backoff

  static Smoothing add_k(double k) { return {SmoothingKind::kAddK, k}; }
  static Smoothing stupid_backoff(double lambda = 0.4) { return {SmoothingKind::kStupidBackoff, lambda}; }
  friend bool operator==(const Smoothing&, const Smoothing&) = default;
};

// Character-level n-gram language model. Each non-blank line of a document
// is one sentence, padded with n-1 begin markers and one end marker. The
// vocabulary is closed over the training scalars; everything else maps to
// the unknown token.
class NGramLM {
 public:
  static constexpr char32_t kBos = 0x110000;
  static constexpr char32_t kEos = 0x110001;
  static constexpr char32_t kUnk = 0x110002;

  // Throws ConfigError for n < 1, an empty corpus, or a negative k / a
  // backoff factor outside (0, 1].
  static NGramLM train(std::span<const std::string> corpus, unsigned n, Smoothing smoothing,
                       unsigned workers = 1);

  // Every predictable token (the scalars plus end and unknown markers) gets
  // probability 1 / vocab_size().
  static NGramLM uniform(std::u32string_view scalars);

  unsigned order() const { return n_; }
  const Smoothing& smoothing() const { return smoothing_; }
  // Predictable tokens: training scalars, end marker, unknown token.
  std::size_t vocab_size() const { return vocab_.size() + 2; }
  bool in_vocab(char32_t c) const;

  // P(next | context); only the last n-1 tokens of context are used. Under
  // add-k with k = 0 unseen events have probability 0.
  double prob(std::u32string_view context, char32_t next) const;
  // Natural log of prob(), computed from the counts in extended precision;
  // -inf for an impossible event.
  long double log_prob(std::u32string_view context, char32_t next) const;

  // Maps scalars to the unknown token where needed and frames each line.
  std::vector<std::u32string> sentences(std::string_view text) const;

  std::string to_bytes() const;
  static NGramLM from_bytes(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static NGramLM load(const std::filesystem::path& path);

  friend bool operator==(const NGramLM&, const NGramLM&) = default;

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::unordered_map<char32_t, std::uint64_t> next;
    friend bool operator==(const ContextCounts&, const ContextCounts&) = default;
  };

  double backoff_score(std::u32string_view context, char32_t next) const;
  std::uint64_t count(std::u32string_view context, char32_t next, std::uint64_t* total) const;

  unsigned n_ = 1;
  Smoothing smoothing_;
  std::vector<char32_t> vocab_;  // sorted training scalars
  std::unordered_map<std::u32string, ContextCounts> counts_;  // context of every length < n
};

// exp of the mean negative log-probability over all predicted tokens of the
// dev corpus. Throws ConfigError for an empty dev corpus and Error when an
// event has probability zero.
double perplexity(const NGramLM& lm, std::span<const std::string> dev, unsigned workers = 1);

}  // namespace corpuskit
