#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

enum class ErrorPolicy { kSkip, kFail };

struct IngestResult {
  std::vector<Document> docs;
  std::size_t lines = 0;    // non-blank lines seen
  std::size_t skipped = 0;  // malformed lines dropped under kSkip
  std::vector<std::string> errors;
};

// Reads line-delimited JSON records. Required key "text"; optional "url",
// "title" and "meta" (string map). Any "id" is ignored and recomputed.
// NUL scalars are removed from the text. Throws IoError when the file cannot
// be opened and FormatError (with line number) on a bad line under kFail.
IngestResult ingest_jsonl(const std::filesystem::path& path, Source source,
                          ErrorPolicy policy = ErrorPolicy::kSkip);

// Same, over an in-memory buffer.
IngestResult ingest_jsonl_buffer(std::string_view buffer, Source source,
                                 ErrorPolicy policy = ErrorPolicy::kSkip);

// Converts one labeled record (a JSON object as text) into an unlabeled
// document: text is the newline-joined values of the listed fields that are
// present, in order. Every other field is discarded; "url" and "title" are
// kept as document attributes. Throws FormatError when no field is present.
Document strip_labels(std::string_view record_json, const std::vector<std::string>& text_fields,
                      Source source = Source::kPublic);

struct LabeledIngestResult {
  std::vector<Document> docs;
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t rejected = 0;  // well-formed but no text field
};

LabeledIngestResult ingest_labeled_jsonl(const std::filesystem::path& path,
                                         const std::vector<std::string>& text_fields,
                                         Source source = Source::kPublic,
                                         ErrorPolicy policy = ErrorPolicy::kSkip);

}  // namespace corpuskit
