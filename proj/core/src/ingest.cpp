#include "corpuskit/ingest.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "corpuskit/error.hpp"

namespace corpuskit {

using json = nlohmann::json;

namespace {

std::string strip_nul(std::string s) {
  std::erase(s, '\0');
  return s;
}

// Parses one record line; throws FormatError with the line number.
Document parse_record(std::string_view line, std::size_t lineno, Source source) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what(), lineno);
  }
  if (!j.is_object()) throw FormatError("record is not an object", lineno);
  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) throw FormatError("missing string field 'text'", lineno);

  Document doc = make_document(source, strip_nul(text->get<std::string>()));
  if (const auto it = j.find("url"); it != j.end() && it->is_string()) {
    doc.url = strip_nul(it->get<std::string>());
  }
  if (const auto it = j.find("title"); it != j.end() && it->is_string()) {
    doc.title = strip_nul(it->get<std::string>());
  }
  if (const auto it = j.find("meta"); it != j.end()) {
    if (!it->is_object()) throw FormatError("'meta' must be an object", lineno);
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string()) throw FormatError("'meta' values must be strings", lineno);
      doc.meta[k] = strip_nul(v.get<std::string>());
    }
  }
  return doc;
}

template <typename Fn>
void for_each_line(std::string_view buffer, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < buffer.size()) {
    std::size_t end = buffer.find('\n', start);
    if (end == std::string_view::npos) end = buffer.size();
    std::string_view line = buffer.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line, lineno);
    start = end + 1;
  }
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

IngestResult ingest_jsonl_buffer(std::string_view buffer, Source source, ErrorPolicy policy) {
  IngestResult result;
  for_each_line(buffer, [&](std::string_view line, std::size_t lineno) {
    ++result.lines;
    try {
      result.docs.push_back(parse_record(line, lineno, source));
    } catch (const FormatError& e) {
      if (policy == ErrorPolicy::kFail) throw;
      ++result.skipped;
      result.errors.push_back(e.what());
    }
  });
  return result;
}

IngestResult ingest_jsonl(const std::filesystem::path& path, Source source, ErrorPolicy policy) {
  return ingest_jsonl_buffer(read_all(path), source, policy);
}

Document strip_labels(std::string_view record_json, const std::vector<std::string>& text_fields,
                      Source source) {
  json j;
  try {
    j = json::parse(record_json);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("record is not an object");

  std::string text;
  bool any = false;
  for (const auto& field : text_fields) {
    const auto it = j.find(field);
    if (it == j.end() || !it->is_string()) continue;
    if (any) text.push_back('\n');
    text += it->get<std::string>();
    any = true;
  }
  if (!any) throw FormatError("record has none of the configured text fields");

  Document doc = make_document(source, strip_nul(std::move(text)));
  if (const auto it = j.find("url"); it != j.end() && it->is_string()) doc.url = it->get<std::string>();
  if (const auto it = j.find("title"); it != j.end() && it->is_string()) {
    doc.title = it->get<std::string>();
  }
  return doc;
}

LabeledIngestResult ingest_labeled_jsonl(const std::filesystem::path& path,
                                         const std::vector<std::string>& text_fields,
                                         Source source, ErrorPolicy policy) {
  LabeledIngestResult result;
  const std::string buffer = read_all(path);
  for_each_line(buffer, [&](std::string_view line, std::size_t lineno) {
    ++result.lines;
    try {
      result.docs.push_back(strip_labels(line, text_fields, source));
    } catch (const FormatError& e) {
      if (policy == ErrorPolicy::kFail) throw FormatError(e.what(), lineno);
      const bool parsed = json::accept(line);
      ++(parsed ? result.rejected : result.malformed);
    }
  });
  return result;
}

}  // namespace corpuskit
