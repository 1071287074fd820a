#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>

namespace corpuskit {

// Single-scalar traditional -> simplified Chinese mapping.
class ConversionTable {
 public:
  ConversionTable() = default;
  explicit ConversionTable(std::unordered_map<char32_t, char32_t> map) : map_(std::move(map)) {}

  // UTF-8 TSV "traditional<TAB>simplified", one pair per line; '#' comments.
  // Throws FormatError when a side is not exactly one scalar.
  static ConversionTable parse(std::string_view tsv);
  static ConversionTable load(const std::filesystem::path& path);
  // Table shipped with the library (about 4k pairs).
  static const ConversionTable& bundled();

  char32_t map(char32_t c) const {
    const auto it = map_.find(c);
    return it == map_.end() ? c : it->second;
  }
  bool contains(char32_t c) const { return map_.contains(c); }
  std::size_t size() const { return map_.size(); }
  const std::unordered_map<char32_t, char32_t>& pairs() const { return map_; }

 private:
  std::unordered_map<char32_t, char32_t> map_;
};

// Replaces every scalar found in the table; the scalar count is unchanged.
std::string t2s_convert(std::string_view text, const ConversionTable& table);

}  // namespace corpuskit
