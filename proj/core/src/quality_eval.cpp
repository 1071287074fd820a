#include "corpuskit/quality_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "corpuskit/error.hpp"
#include "corpuskit/random.hpp"
#include "corpuskit/utf8.hpp"

namespace corpuskit {

namespace {

constexpr std::size_t kExcerptChars = 500;

std::vector<std::string> sample_corpus(std::span<const std::string> corpus, const ProbeParams& params) {
  if (params.sample_docs == 0 || params.sample_docs >= corpus.size()) {
    return {corpus.begin(), corpus.end()};
  }
  auto idx = sample_indices(corpus.size(), params.sample_docs, params.seed);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(corpus[i]);
  return out;
}

}  // namespace

double probe_perplexity(std::span<const std::string> corpus, std::span<const std::string> dev,
                        const ProbeParams& params) {
  const auto sample = sample_corpus(corpus, params);
  const NGramLM lm = NGramLM::train(sample, params.order, params.smoothing, params.workers);
  return perplexity(lm, dev, params.workers);
}

CompareVerdict compare_configs(std::span<const std::string> corpus_a, std::span<const std::string> corpus_b,
                               std::span<const std::string> dev, const ProbeParams& params) {
  CompareVerdict v;
  v.ppl_a = probe_perplexity(corpus_a, dev, params);
  v.ppl_b = probe_perplexity(corpus_b, dev, params);
  const double rel = std::abs(v.ppl_a - v.ppl_b) / std::min(v.ppl_a, v.ppl_b);
  if (rel < params.tie_tolerance) {
    v.better = Better::kTie;
  } else {
    v.better = v.ppl_a < v.ppl_b ? Better::kA : Better::kB;
  }
  return v;
}

std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed) {
  if (n > size) throw ConfigError("sample size exceeds corpus size");
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(idx[i], idx[i + rng.below(size - i)]);
  }
  idx.resize(n);
  return idx;
}

std::vector<ReviewItem> sample_for_manual_review(std::span<const Document> corpus, std::size_t n,
                                                 std::uint64_t seed) {
  std::vector<ReviewItem> items;
  for (std::size_t i : sample_indices(corpus.size(), n, seed)) {
    const Document& d = corpus[i];
    std::u32string text = utf8::decode(d.text);
    if (text.size() > kExcerptChars) text.resize(kExcerptChars);
    items.push_back({d.id, d.source, utf8::encode(text)});
  }
  return items;
}

void write_review_file(const std::filesystem::path& path, std::span<const ReviewItem> items) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& item : items) {
    nlohmann::ordered_json j;
    j["doc_id"] = item.doc_id;
    j["source"] = source_name(item.source);
    j["excerpt"] = item.excerpt;
    j["smoothness"] = nullptr;
    j["advertisement"] = nullptr;
    j["repeated_short_sentences"] = nullptr;
    j["spam"] = nullptr;
    j["notes"] = "";
    out << j.dump() << '\n';
  }
}

}  // namespace corpuskit
