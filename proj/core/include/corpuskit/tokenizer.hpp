#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace corpuskit {

using TokenId = std::uint32_t;

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenId> encode(std::string_view text) const = 0;
  virtual std::size_t count(std::string_view text) const { return encode(text).size(); }
};

// One token per Unicode scalar; the id is the scalar value.
class CharTokenizer final : public Tokenizer {
 public:
  std::vector<TokenId> encode(std::string_view text) const override;
  std::size_t count(std::string_view text) const override;
};

// Character-level byte pair encoding. Ids 0-255 are byte tokens used for
// scalars outside the training alphabet, followed by the alphabet in UTF-8
// byte order, followed by one token per merge. Merges never cross
// whitespace or punctuation, which always stand alone.
class BpeModel final : public Tokenizer {
 public:
  static constexpr std::size_t kByteTokens = 256;

  // Greedy BPE: merge the most frequent adjacent pair (ties go to the
  // lexicographically smallest (left, right)) until the vocabulary reaches
  // target_vocab or no pair occurs twice. Throws ConfigError on an empty
  // corpus or when target_vocab does not exceed the alphabet size.
  static BpeModel train(std::span<const std::string> corpus, std::size_t target_vocab, unsigned workers = 1);

  std::vector<TokenId> encode(std::string_view text) const override;
  // Throws FormatError for an id outside the vocabulary.
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t vocab_size() const { return tokens_.size(); }
  std::size_t alphabet_size() const { return alphabet_end_; }
  std::size_t target_vocab() const { return target_vocab_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }
  // The merges as token strings, in order.
  std::vector<std::pair<std::string, std::string>> merge_strings() const;

  // Text format: a header line, "token<TAB>id" lines, "#merges", then
  // "left<TAB>right" lines in merge order. Tokens are escaped (\\ \t \n \r,
  // byte tokens as \xHH).
  std::string to_text() const;
  static BpeModel from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static BpeModel load(const std::filesystem::path& path);

  // Splits text into the units BPE operates on.
  static std::vector<std::string_view> pieces(std::string_view text);

  friend bool operator==(const BpeModel& a, const BpeModel& b) {
    return a.tokens_ == b.tokens_ && a.merges_ == b.merges_ && a.target_vocab_ == b.target_vocab_;
  }

 private:
  void index();
  void encode_piece(std::string_view piece, std::vector<TokenId>& out) const;

  std::vector<std::string> tokens_;
  std::vector<std::pair<TokenId, TokenId>> merges_;
  std::size_t alphabet_end_ = kByteTokens;
  std::size_t target_vocab_ = 0;
  std::unordered_map<std::string, TokenId> char_ids_;  // alphabet scalar (UTF-8) -> id
  std::unordered_map<std::uint64_t, std::uint32_t> merge_rank_;
};

struct TokenStats {
  std::uint64_t total = 0;
  std::uint64_t docs = 0;
  double mean_doc_len = 0.0;
  bool mean_defined = false;  // false for an empty corpus
  std::uint64_t bucket_width = 64;
  std::map<std::uint64_t, std::uint64_t> histogram;  // bucket lower bound -> documents
  std::vector<std::uint64_t> doc_lengths;
};

// Exact token totals. A document of length L falls in bucket
// floor(L / bucket_width) * bucket_width.
TokenStats count_tokens(std::span<const std::string> corpus, const Tokenizer& tokenizer,
                        std::uint64_t bucket_width = 64, unsigned workers = 1);

}  // namespace corpuskit
