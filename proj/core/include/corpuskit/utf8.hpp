#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit::utf8 {

// Decodes UTF-8. Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view scalars);
void append(std::string& out, char32_t c);

// True when `bytes` is well-formed UTF-8 (no surrogates, no overlongs).
bool is_valid(std::string_view bytes);

// Byte offset of every scalar start plus a final entry equal to bytes.size().
std::vector<std::size_t> scalar_offsets(std::string_view bytes);

std::size_t count_scalars(std::string_view bytes);

bool is_space(char32_t c);

// CJK Unified Ideographs, Extension A and Compatibility Ideographs.
inline bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0xF900 && c <= 0xFAFF);
}

// ASCII punctuation plus general, CJK and fullwidth punctuation blocks.
bool is_punct(char32_t c);

// Collapses whitespace runs to one ASCII space and trims both ends.
std::u32string normalize_space(std::u32string_view text);

}  // namespace corpuskit::utf8
