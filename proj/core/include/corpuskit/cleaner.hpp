#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/document.hpp"
#include "corpuskit/lexicon.hpp"
#include "corpuskit/t2s.hpp"

namespace corpuskit {

enum class ParagraphMode {
  kLine,       // every line is a paragraph
  kBlankLine,  // paragraphs are separated by blank lines
};

struct CleanConfig {
  double min_chinese_ratio = 0.60;
  std::size_t min_chars = 150;
  Lexicon ad_keywords = default_ad_keywords();
  std::size_t ad_threshold = 3;
  ConversionTable t2s = ConversionTable::bundled();
  std::size_t nav_max_line_chars = 40;
  double nav_min_delim_density = 0.15;
  ParagraphMode paragraph_mode = ParagraphMode::kLine;

  // Throws ConfigError on out-of-range values or an empty ad lexicon.
  void validate() const;

  static Lexicon default_ad_keywords();
};

// Lexicon entries converted with the table, so matching against converted
// text finds traditional spellings too.
Lexicon normalize_lexicon(const Lexicon& lexicon, const ConversionTable& table);

// CJK ideographs / non-whitespace scalars. 0 for empty or blank text.
double chinese_char_ratio(std::string_view text);

// Number of non-whitespace scalars.
std::size_t content_chars(std::string_view text);

// Drops documents with too few Chinese characters, too little content, or
// nothing beyond a page title. The drop verdict's rule_id names the first
// failing condition, checked in this order: "title_only" (text equals the
// title), "chinese_ratio", "min_chars", "title_only" (a single short line
// without sentence-final punctuation). Thresholds use strict less-than.
RuleVerdict rule_min_content(const Document& doc, const CleanConfig& cfg);

// Removes control characters other than newline and tab, private-use
// scalars and U+FFFD, then collapses runs of four or more identical
// punctuation scalars to one.
std::string remove_special_symbols(std::string_view text);

// Keeps the first occurrence of each paragraph, comparing whitespace-
// normalized forms. Blank paragraphs are never removed.
std::string dedup_paragraphs(std::string_view text, ParagraphMode mode = ParagraphMode::kLine);

// True iff at least `threshold` distinct keywords occur. Throws ConfigError
// for an empty lexicon.
bool detect_ads(std::string_view text, const Lexicon& keywords, std::size_t threshold);

// Fraction of a line made of navigation delimiters: the scalars | ｜ > » / ·
// plus, when the line splits into at least three whitespace-separated tokens
// of at most four scalars each, every separating whitespace run.
double nav_delimiter_density(std::u32string_view line);
bool is_nav_line(std::u32string_view line, const CleanConfig& cfg);

// Removes navigation lines (and blank lines among them) from the leading and
// trailing edges of the text. Lines between body lines are never touched.
std::string strip_nav(std::string_view text, const CleanConfig& cfg);

struct CleanResult {
  Document doc;  // transformed document, audit extended by `verdicts`
  std::vector<RuleVerdict> verdicts;
  bool kept() const { return verdicts.empty() || !verdicts.back().dropped(); }
};

// Applies t2s, special symbol removal, navigation stripping, paragraph
// dedup (the last two repeated until neither changes the text), the ad rule
// and finally the content rule on the transformed text. Only transforms that
// changed something and the final decision are recorded.
CleanResult clean_document(Document doc, const CleanConfig& cfg);

}  // namespace corpuskit
