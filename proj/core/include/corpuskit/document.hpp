#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

// The five upstream data sources. The numeric value participates in the
// document id, so the order is fixed.
enum class Source : std::uint8_t { kPublic = 0, kEncyclopedia, kEbooks, kCommonCrawl, kNews };

inline constexpr std::array<Source, 5> kAllSources = {
    Source::kPublic, Source::kEncyclopedia, Source::kEbooks, Source::kCommonCrawl, Source::kNews};

std::string_view source_name(Source s);
// Accepts "public", "encyclopedia", "ebooks", "common_crawl", "news".
std::optional<Source> parse_source(std::string_view name);

enum class Action : std::uint8_t { kKeep, kDrop, kTransform };
enum class Stage : std::uint8_t { kClean, kFilter, kDedup };

std::string_view action_name(Action a);
std::string_view stage_name(Stage s);

struct RuleVerdict {
  std::string rule_id;
  Action action = Action::kKeep;
  std::string detail;
  Stage stage = Stage::kClean;

  bool dropped() const { return action == Action::kDrop; }
  friend bool operator==(const RuleVerdict&, const RuleVerdict&) = default;
};

struct Document {
  std::string id;  // 32 hex digits, see make_document_id
  Source source = Source::kCommonCrawl;
  std::optional<std::string> url;
  std::optional<std::string> title;
  std::string text;
  std::map<std::string, std::string> meta;
  std::vector<RuleVerdict> audit;

  friend bool operator==(const Document&, const Document&) = default;
};

// 128-bit MurmurHash3 of (source byte, 0x1F, UTF-8 text) in hex.
std::string make_document_id(Source source, std::string_view text);

// Builds a document with its id assigned.
Document make_document(Source source, std::string text);

// One compact JSON object, no trailing newline. Keys are emitted in a fixed
// order so that serialization is byte-stable.
std::string serialize(const Document& doc);
// Inverse of serialize. Throws FormatError.
Document deserialize(std::string_view line);

}  // namespace corpuskit
