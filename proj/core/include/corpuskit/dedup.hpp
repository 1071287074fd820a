#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

struct MinHashParams {
  std::size_t k = 128;        // signature length
  std::size_t shingle_w = 5;  // characters per shingle
  std::uint64_t seed = 0x243f6a8885a308d3ULL;  // selects the hash family

  void validate() const;
  // The k per-coordinate seeds derived from `seed`.
  std::vector<std::uint64_t> family() const;
  // Identifies (k, shingle_w, family); signatures are comparable iff equal.
  std::uint64_t fingerprint() const;
};

struct DedupParams {
  MinHashParams minhash;
  std::size_t bands = 32;
  std::size_t rows = 4;
  double jaccard_threshold = 0.8;
  bool verify = true;         // drop candidate pairs below the threshold
  bool exact_verify = false;  // verify with exact shingle-set Jaccard

  // Throws ConfigError unless bands * rows == k and 0 < threshold <= 1.
  void validate() const;
};

struct MinHashSignature {
  std::string doc_id;
  std::vector<std::uint64_t> mins;
  std::uint64_t family = 0;  // MinHashParams::fingerprint()
  bool empty = false;        // no shingles; mins are all UINT64_MAX

  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

// Hashes of every window of `w` scalars of the whitespace-normalized text,
// sorted and unique. Text shorter than w yields no shingles.
std::vector<std::uint64_t> shingles(std::string_view text, std::size_t w);

// Per-coordinate minimum of the seeded hash family over the shingle set.
class MinHasher {
 public:
  explicit MinHasher(MinHashParams params);
  const MinHashParams& params() const { return params_; }
  MinHashSignature sign(std::span<const std::uint64_t> shingle_set, std::string doc_id = {}) const;
  MinHashSignature sign_text(std::string_view text, std::string doc_id = {}) const;

 private:
  MinHashParams params_;
  std::vector<std::uint64_t> seeds_;
  std::uint64_t fingerprint_;
};

inline MinHashSignature minhash(std::span<const std::uint64_t> shingle_set, const MinHashParams& params) {
  return MinHasher(params).sign(shingle_set);
}

// Fraction of agreeing coordinates. Two empty signatures estimate 1, one
// empty signature 0. Throws ConfigError when the families differ.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

// |A ∩ B| / |A ∪ B| over sorted unique sets; 1 when both are empty.
double exact_jaccard(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

// One key per band: hash of (band index, the band's r minima). Empty
// signatures have no keys. Throws ConfigError unless bands * rows == k.
std::vector<std::uint64_t> lsh_bucket_keys(const MinHashSignature& sig, std::size_t bands, std::size_t rows);

// Probability that a pair with Jaccard s shares at least one band.
double lsh_candidate_probability(double s, std::size_t bands, std::size_t rows);

struct DupEdge {
  std::string a;  // a < b
  std::string b;
  double jaccard = 0.0;  // estimated, or exact under exact_verify
  friend bool operator==(const DupEdge&, const DupEdge&) = default;
};

struct DupCluster {
  std::vector<std::string> members;  // sorted, includes the survivor
  std::string survivor;              // smallest member id
  std::vector<DupEdge> evidence;     // verified edges, sorted
  friend bool operator==(const DupCluster&, const DupCluster&) = default;
};

struct DedupStats {
  std::size_t docs_in = 0;
  std::size_t docs_out = 0;
  std::size_t candidate_pairs = 0;
  std::size_t verified_pairs = 0;
  std::size_t clusters = 0;
};

struct DedupResult {
  std::vector<Document> survivors;  // in input order
  std::vector<Document> dropped;    // each with a dedup drop verdict
  std::vector<DupCluster> clusters;  // sorted by survivor
  DedupStats stats;
};

// Signatures keyed by document id, reusable across runs with equal params.
using SignatureCache = std::map<std::string, MinHashSignature>;

// Three phases: (1) sign every document in parallel; (2) group documents by
// band key and emit pairs sharing a bucket; (3) verify candidates against
// the threshold, union the kept pairs and keep the smallest id per cluster.
// Documents without shingles are paired only with byte-identical texts.
// The result does not depend on the order of shards or documents.
DedupResult deduplicate(std::span<const std::vector<Document>> shards, const DedupParams& params,
                        unsigned workers = 1, SignatureCache* cache = nullptr);

// One JSON object per cluster: {"survivor", "members", "edges":[{"a","b","jaccard"}]}.
std::string serialize_cluster(const DupCluster& cluster);

void save_signatures(const std::filesystem::path& path, const SignatureCache& cache,
                     const MinHashParams& params);
// Returns nothing when the file is absent or was written with other params.
std::optional<SignatureCache> load_signatures(const std::filesystem::path& path,
                                              const MinHashParams& params);

}  // namespace corpuskit
