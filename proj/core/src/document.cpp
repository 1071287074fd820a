#include "corpuskit/document.hpp"

#include <json.hpp>

#include "corpuskit/error.hpp"
#include "corpuskit/hash.hpp"

namespace corpuskit {

using ordered_json = nlohmann::ordered_json;

std::string_view source_name(Source s) {
  switch (s) {
    case Source::kPublic: return "public";
    case Source::kEncyclopedia: return "encyclopedia";
    case Source::kEbooks: return "ebooks";
    case Source::kCommonCrawl: return "common_crawl";
    case Source::kNews: return "news";
  }
  return "unknown";
}

std::optional<Source> parse_source(std::string_view name) {
  for (Source s : kAllSources) {
    if (source_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kKeep: return "keep";
    case Action::kDrop: return "drop";
    case Action::kTransform: return "transform";
  }
  return "unknown";
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kClean: return "clean";
    case Stage::kFilter: return "filter";
    case Stage::kDedup: return "dedup";
  }
  return "unknown";
}

namespace {

Action parse_action(const std::string& s) {
  if (s == "keep") return Action::kKeep;
  if (s == "drop") return Action::kDrop;
  if (s == "transform") return Action::kTransform;
  throw FormatError("unknown verdict action '" + s + "'");
}

Stage parse_stage(const std::string& s) {
  if (s == "clean") return Stage::kClean;
  if (s == "filter") return Stage::kFilter;
  if (s == "dedup") return Stage::kDedup;
  throw FormatError("unknown verdict stage '" + s + "'");
}

}  // namespace

std::string make_document_id(Source source, std::string_view text) {
  std::string key;
  key.reserve(text.size() + 2);
  key.push_back(static_cast<char>(source));
  key.push_back('\x1F');
  key.append(text);
  return to_hex(murmur3_128(key));
}

Document make_document(Source source, std::string text) {
  Document doc;
  doc.source = source;
  doc.id = make_document_id(source, text);
  doc.text = std::move(text);
  return doc;
}

std::string serialize(const Document& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["source"] = source_name(doc.source);
  if (doc.url) j["url"] = *doc.url;
  if (doc.title) j["title"] = *doc.title;
  j["text"] = doc.text;
  if (!doc.meta.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : doc.meta) meta[k] = v;
    j["meta"] = std::move(meta);
  }
  if (!doc.audit.empty()) {
    ordered_json audit = ordered_json::array();
    for (const auto& v : doc.audit) {
      audit.push_back({{"rule", v.rule_id},
                       {"action", action_name(v.action)},
                       {"stage", stage_name(v.stage)},
                       {"detail", v.detail}});
    }
    j["audit"] = std::move(audit);
  }
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

Document deserialize(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    Document doc;
    doc.id = j.at("id").get<std::string>();
    const auto src = parse_source(j.at("source").get<std::string>());
    if (!src) throw FormatError("unknown source in record");
    doc.source = *src;
    if (j.contains("url")) doc.url = j["url"].get<std::string>();
    if (j.contains("title")) doc.title = j["title"].get<std::string>();
    doc.text = j.at("text").get<std::string>();
    if (j.contains("meta")) {
      for (const auto& [k, v] : j["meta"].items()) doc.meta[k] = v.get<std::string>();
    }
    if (j.contains("audit")) {
      for (const auto& v : j["audit"]) {
        doc.audit.push_back({v.at("rule").get<std::string>(),
                             parse_action(v.at("action").get<std::string>()),
                             v.at("detail").get<std::string>(),
                             parse_stage(v.at("stage").get<std::string>())});
      }
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad document record: ") + e.what());
  }
}

}  // namespace corpuskit
