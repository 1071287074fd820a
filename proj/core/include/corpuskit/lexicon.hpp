#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

// A set of keywords with a multi-pattern (Aho-Corasick) matcher over UTF-8
// bytes. Immutable once built; safe to share between threads.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<std::string> words);

  // UTF-8, one entry per line, '#' starts a comment line, blank lines ignored.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::string_view contents);

  const std::vector<std::string>& words() const { return words_; }
  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }

  // Indices (into words()) of every entry occurring in text, ascending, each
  // reported once however often it occurs.
  std::vector<std::size_t> distinct_matches(std::string_view text) const;

  // Stops scanning once `limit` distinct entries have been seen.
  std::size_t count_distinct(std::string_view text, std::size_t limit = SIZE_MAX) const;

 private:
  struct Node {
    std::vector<std::pair<unsigned char, std::int32_t>> next;  // sorted by byte
    std::int32_t fail = 0;
    std::int32_t out = -1;       // word index ending here
    std::int32_t out_link = -1;  // nearest suffix node with an output
  };

  std::int32_t child(std::int32_t node, unsigned char b) const;
  void build();

  template <typename Fn>
  void scan(std::string_view text, Fn&& on_match) const;

  std::vector<std::string> words_;  // deduplicated, sorted
  std::vector<Node> nodes_;
};

}  // namespace corpuskit
