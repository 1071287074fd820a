#include "corpuskit/cleaner.hpp"

#include <algorithm>
#include <unordered_set>

#include "corpuskit/error.hpp"
#include "corpuskit/utf8.hpp"

namespace corpuskit {

namespace embedded {
extern const std::string_view ad_keywords_txt;
}

namespace {

std::vector<std::u32string_view> split_lines(std::u32string_view text) {
  std::vector<std::u32string_view> lines;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = text.find(U'\n', start);
    if (end == std::u32string_view::npos) {
      lines.push_back(text.substr(start));
      return lines;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
}

std::u32string join_lines(const std::vector<std::u32string_view>& lines, std::u32string_view sep) {
  std::u32string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += sep;
    out += lines[i];
  }
  return out;
}

bool is_blank(std::u32string_view s) {
  return std::all_of(s.begin(), s.end(), utf8::is_space);
}

std::u32string_view trim(std::u32string_view s) {
  while (!s.empty() && utf8::is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && utf8::is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_sentence_final(char32_t c) {
  switch (c) {
    case U'。': case U'！': case U'？': case U'.': case U'!': case U'?': case U'…':
    case U'；': case U'”': case U'」': case U'』':
      return true;
    default:
      return false;
  }
}

bool is_special(char32_t c) {
  if (c == U'\n' || c == U'\t') return false;
  if (c < 0x20 || (c >= 0x7F && c <= 0x9F)) return true;
  if (c >= 0xE000 && c <= 0xF8FF) return true;
  if (c >= 0xF0000) return true;  // planes 15 and 16 are private use
  return c == 0xFFFD;
}

bool is_nav_delimiter(char32_t c) {
  switch (c) {
    case U'|': case U'｜': case U'>': case U'»': case U'/': case U'·':
      return true;
    default:
      return false;
  }
}

std::size_t count_changed(std::string_view before, std::string_view after) {
  const std::u32string a = utf8::decode(before);
  const std::u32string b = utf8::decode(after);
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) n += a[i] != b[i];
  return n;
}

std::size_t count_lines(std::string_view text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
}

}  // namespace

Lexicon CleanConfig::default_ad_keywords() { return Lexicon::parse(embedded::ad_keywords_txt); }

void CleanConfig::validate() const {
  if (!(min_chinese_ratio >= 0.0 && min_chinese_ratio <= 1.0)) {
    throw ConfigError("min_chinese_ratio must be within [0, 1]");
  }
  if (ad_threshold < 1) throw ConfigError("ad_threshold must be at least 1");
  if (nav_max_line_chars < 1) throw ConfigError("nav_max_line_chars must be at least 1");
  if (!(nav_min_delim_density > 0.0 && nav_min_delim_density <= 1.0)) {
    throw ConfigError("nav_min_delim_density must be within (0, 1]");
  }
  if (ad_keywords.empty()) throw ConfigError("ad keyword lexicon is empty");
}

Lexicon normalize_lexicon(const Lexicon& lexicon, const ConversionTable& table) {
  std::vector<std::string> words;
  words.reserve(lexicon.size());
  for (const auto& w : lexicon.words()) words.push_back(t2s_convert(w, table));
  return Lexicon(std::move(words));
}

double chinese_char_ratio(std::string_view text) {
  std::size_t cjk = 0;
  std::size_t total = 0;
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_space(c)) continue;
    ++total;
    cjk += utf8::is_cjk(c);
  }
  return total == 0 ? 0.0 : static_cast<double>(cjk) / static_cast<double>(total);
}

std::size_t content_chars(std::string_view text) {
  const std::u32string s = utf8::decode(text);
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char32_t c) { return !utf8::is_space(c); }));
}

RuleVerdict rule_min_content(const Document& doc, const CleanConfig& cfg) {
  const std::u32string text = utf8::decode(doc.text);
  const std::u32string_view body = trim(text);

  auto drop = [](std::string rule, std::string detail) {
    return RuleVerdict{std::move(rule), Action::kDrop, std::move(detail), Stage::kClean};
  };

  if (doc.title) {
    const std::u32string title = utf8::decode(*doc.title);
    if (!trim(title).empty() && trim(title) == body) return drop("title_only", "text equals page title");
  }
  std::size_t cjk = 0;
  std::size_t chars = 0;
  for (char32_t c : text) {
    if (utf8::is_space(c)) continue;
    ++chars;
    cjk += utf8::is_cjk(c);
  }
  const double ratio = chars == 0 ? 0.0 : static_cast<double>(cjk) / static_cast<double>(chars);
  if (ratio < cfg.min_chinese_ratio) {
    return drop("chinese_ratio", "ratio " + std::to_string(ratio) + " < " + std::to_string(cfg.min_chinese_ratio));
  }
  if (chars < cfg.min_chars) {
    return drop("min_chars", std::to_string(chars) + " < " + std::to_string(cfg.min_chars));
  }
  if (body.find(U'\n') == std::u32string_view::npos && body.size() < cfg.min_chars &&
      !body.empty() && !is_sentence_final(body.back())) {
    return drop("title_only", "single short line without sentence-final punctuation");
  }
  return RuleVerdict{"min_content", Action::kKeep, "", Stage::kClean};
}

std::string remove_special_symbols(std::string_view text) {
  const std::u32string in = utf8::decode(text);
  std::u32string kept;
  kept.reserve(in.size());
  for (char32_t c : in) {
    if (!is_special(c)) kept.push_back(c);
  }
  std::u32string out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size();) {
    std::size_t j = i + 1;
    while (j < kept.size() && kept[j] == kept[i]) ++j;
    const std::size_t run = j - i;
    if (run >= 4 && utf8::is_punct(kept[i])) {
      out.push_back(kept[i]);
    } else {
      out.append(kept, i, run);
    }
    i = j;
  }
  return utf8::encode(out);
}

std::string dedup_paragraphs(std::string_view text, ParagraphMode mode) {
  const std::u32string s = utf8::decode(text);
  std::vector<std::u32string_view> paragraphs;
  std::u32string_view sep;
  if (mode == ParagraphMode::kLine) {
    paragraphs = split_lines(s);
    sep = U"\n";
  } else {
    // Consecutive non-blank lines form one paragraph.
    sep = U"\n\n";
    std::size_t offset = 0;
    std::size_t para_begin = 0;
    std::size_t para_end = 0;
    bool open = false;
    for (const auto& line : split_lines(s)) {
      if (is_blank(line)) {
        if (open) paragraphs.push_back(std::u32string_view(s).substr(para_begin, para_end - para_begin));
        open = false;
      } else {
        if (!open) para_begin = offset;
        para_end = offset + line.size();
        open = true;
      }
      offset += line.size() + 1;
    }
    if (open) paragraphs.push_back(std::u32string_view(s).substr(para_begin, para_end - para_begin));
  }

  std::unordered_set<std::u32string> seen;
  std::vector<std::u32string_view> kept;
  kept.reserve(paragraphs.size());
  for (const auto& p : paragraphs) {
    std::u32string key = utf8::normalize_space(p);
    if (key.empty() || seen.insert(std::move(key)).second) kept.push_back(p);
  }
  if (kept.size() == paragraphs.size()) return std::string(text);
  return utf8::encode(join_lines(kept, sep));
}

bool detect_ads(std::string_view text, const Lexicon& keywords, std::size_t threshold) {
  if (keywords.empty()) throw ConfigError("ad keyword lexicon is empty");
  return keywords.count_distinct(text, threshold) >= threshold;
}

double nav_delimiter_density(std::u32string_view line) {
  if (line.empty()) return 0.0;
  std::size_t delims = 0;
  std::size_t tokens = 0;
  std::size_t separators = 0;
  std::size_t token_len = 0;
  bool short_tokens = true;
  bool in_token = false;
  for (char32_t c : line) {
    delims += is_nav_delimiter(c);
    if (utf8::is_space(c)) {
      if (in_token) {
        short_tokens = short_tokens && token_len <= 4;
        in_token = false;
      }
    } else {
      if (!in_token) {
        if (tokens > 0) ++separators;
        ++tokens;
        token_len = 0;
        in_token = true;
      }
      ++token_len;
    }
  }
  if (in_token) short_tokens = short_tokens && token_len <= 4;
  if (tokens >= 3 && short_tokens) delims += separators;
  return static_cast<double>(delims) / static_cast<double>(line.size());
}

bool is_nav_line(std::u32string_view line, const CleanConfig& cfg) {
  return !is_blank(line) && line.size() < cfg.nav_max_line_chars &&
         nav_delimiter_density(line) >= cfg.nav_min_delim_density;
}

std::string strip_nav(std::string_view text, const CleanConfig& cfg) {
  const std::u32string s = utf8::decode(text);
  const auto lines = split_lines(s);
  const std::size_t n = lines.size();

  // Leading block: everything up to the last nav line of the nav-or-blank prefix.
  std::size_t head = 0;
  for (std::size_t i = 0; i < n && (is_blank(lines[i]) || is_nav_line(lines[i], cfg)); ++i) {
    if (!is_blank(lines[i])) head = i + 1;
  }
  std::size_t tail = n;
  for (std::size_t i = n; i > head && (is_blank(lines[i - 1]) || is_nav_line(lines[i - 1], cfg)); --i) {
    if (!is_blank(lines[i - 1])) tail = i - 1;
  }
  if (head == 0 && tail == n) return std::string(text);
  std::vector<std::u32string_view> kept(lines.begin() + static_cast<std::ptrdiff_t>(head),
                                        lines.begin() + static_cast<std::ptrdiff_t>(tail));
  return utf8::encode(join_lines(kept, U"\n"));
}

CleanResult clean_document(Document doc, const CleanConfig& cfg) {
  CleanResult result;
  auto record = [&](RuleVerdict v) {
    doc.audit.push_back(v);
    result.verdicts.push_back(std::move(v));
  };
  auto transform = [&](std::string rule, std::string detail) {
    record({std::move(rule), Action::kTransform, std::move(detail), Stage::kClean});
  };

  std::string text = t2s_convert(doc.text, cfg.t2s);
  if (text != doc.text) {
    transform("t2s", "converted " + std::to_string(count_changed(doc.text, text)) + " characters");
  }
  if (doc.title) doc.title = t2s_convert(*doc.title, cfg.t2s);

  std::string next = remove_special_symbols(text);
  if (next != text) {
    transform("special_symbols", "removed " + std::to_string(text.size() - next.size()) + " bytes");
    text = std::move(next);
  }

  std::size_t nav_lines = 0;
  std::size_t dup_paras = 0;
  for (;;) {
    std::string stripped = strip_nav(text, cfg);
    std::string deduped = dedup_paragraphs(stripped, cfg.paragraph_mode);
    if (deduped == text) break;
    nav_lines += count_lines(text) - count_lines(stripped);
    dup_paras += count_lines(stripped) - count_lines(deduped);
    text = std::move(deduped);
  }
  if (nav_lines) transform("nav_bar", "removed " + std::to_string(nav_lines) + " lines");
  if (dup_paras) transform("dup_paragraphs", "removed " + std::to_string(dup_paras) + " lines");
  doc.text = std::move(text);

  if (!cfg.ad_keywords.empty()) {
    const auto matches = cfg.ad_keywords.distinct_matches(doc.text);
    if (matches.size() >= cfg.ad_threshold) {
      std::string detail = "matched";
      for (std::size_t i : matches) detail += " " + cfg.ad_keywords.words()[i];
      record({"ads", Action::kDrop, std::move(detail), Stage::kClean});
      result.doc = std::move(doc);
      return result;
    }
  }

  record(rule_min_content(doc, cfg));
  result.doc = std::move(doc);
  return result;
}

}  // namespace corpuskit
