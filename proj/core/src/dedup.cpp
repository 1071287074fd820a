#include "corpuskit/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>

#include <json.hpp>

#include "binary_io.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/random.hpp"
#include "corpuskit/utf8.hpp"

namespace corpuskit {

namespace {

constexpr std::uint64_t kShingleSeed = 0x13198a2e03707344ULL;
constexpr std::uint64_t kBandSeed = 0xa4093822299f31d0ULL;
constexpr std::string_view kSigMagic = "CKMHSIG1";

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // The smaller root wins, so a root is always its component's minimum.
  void unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

void MinHashParams::validate() const {
  if (k == 0) throw ConfigError("minhash k must be positive");
  if (shingle_w == 0) throw ConfigError("shingle width must be positive");
}

std::vector<std::uint64_t> MinHashParams::family() const {
  Rng rng(seed);
  std::vector<std::uint64_t> seeds(k);
  for (auto& s : seeds) s = rng.next();
  return seeds;
}

std::uint64_t MinHashParams::fingerprint() const {
  return mix64(mix64(seed ^ k) ^ (shingle_w * 0x9E3779B97F4A7C15ULL));
}

void DedupParams::validate() const {
  minhash.validate();
  if (bands == 0 || rows == 0 || bands * rows != minhash.k) {
    throw ConfigError("bands * rows must equal the signature length k");
  }
  if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0)) {
    throw ConfigError("jaccard_threshold must be within (0, 1]");
  }
}

std::vector<std::uint64_t> shingles(std::string_view text, std::size_t w) {
  if (w == 0) throw ConfigError("shingle width must be positive");
  const std::string norm = utf8::encode(utf8::normalize_space(utf8::decode(text)));
  const auto offsets = utf8::scalar_offsets(norm);
  const std::size_t n = offsets.size() - 1;
  std::vector<std::uint64_t> out;
  if (n < w) return out;
  out.reserve(n - w + 1);
  for (std::size_t i = 0; i + w <= n; ++i) {
    out.push_back(hash64(std::string_view(norm).substr(offsets[i], offsets[i + w] - offsets[i]), kShingleSeed));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MinHasher::MinHasher(MinHashParams params)
    : params_(std::move(params)), seeds_(params_.family()), fingerprint_(params_.fingerprint()) {
  params_.validate();
}

MinHashSignature MinHasher::sign(std::span<const std::uint64_t> shingle_set, std::string doc_id) const {
  MinHashSignature sig;
  sig.doc_id = std::move(doc_id);
  sig.family = fingerprint_;
  sig.mins.assign(params_.k, UINT64_MAX);
  sig.empty = shingle_set.empty();
  for (std::uint64_t s : shingle_set) {
    for (std::size_t i = 0; i < seeds_.size(); ++i) {
      const std::uint64_t h = mix64(s ^ seeds_[i]);
      if (h < sig.mins[i]) sig.mins[i] = h;
    }
  }
  return sig;
}

MinHashSignature MinHasher::sign_text(std::string_view text, std::string doc_id) const {
  return sign(shingles(text, params_.shingle_w), std::move(doc_id));
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.family != b.family || a.mins.size() != b.mins.size()) {
    throw ConfigError("signatures were computed with different minhash parameters");
  }
  if (a.empty || b.empty) return a.empty && b.empty ? 1.0 : 0.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.mins.size(); ++i) agree += a.mins[i] == b.mins[i];
  return static_cast<double>(agree) / static_cast<double>(a.mins.size());
}

double exact_jaccard(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] == b[j]) {
      ++inter, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::vector<std::uint64_t> lsh_bucket_keys(const MinHashSignature& sig, std::size_t bands, std::size_t rows) {
  if (bands * rows != sig.mins.size()) throw ConfigError("bands * rows must equal the signature length");
  std::vector<std::uint64_t> keys;
  if (sig.empty) return keys;
  keys.reserve(bands);
  std::string buf;
  for (std::size_t band = 0; band < bands; ++band) {
    buf.clear();
    for (int s = 0; s < 32; s += 8) buf.push_back(static_cast<char>((band >> s) & 0xFF));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint64_t m = sig.mins[band * rows + r];
      for (int s = 0; s < 64; s += 8) buf.push_back(static_cast<char>((m >> s) & 0xFF));
    }
    keys.push_back(hash64(buf, kBandSeed));
  }
  return keys;
}

double lsh_candidate_probability(double s, std::size_t bands, std::size_t rows) {
  return 1.0 - std::pow(1.0 - std::pow(s, static_cast<double>(rows)), static_cast<double>(bands));
}

DedupResult deduplicate(std::span<const std::vector<Document>> shards, const DedupParams& params,
                        unsigned workers, SignatureCache* cache) {
  params.validate();

  std::vector<const Document*> input;
  for (const auto& shard : shards) {
    for (const auto& d : shard) input.push_back(&d);
  }
  const std::size_t n = input.size();

  // Canonical order: by id, then by full record for equal ids, so decisions
  // do not depend on how documents were split into shards.
  std::vector<std::string> records(n);
  parallel_for(n, workers, [&](std::size_t i) { records[i] = serialize(*input[i]); });
  std::vector<std::size_t> canon(n);
  std::iota(canon.begin(), canon.end(), 0);
  std::sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    if (input[a]->id != input[b]->id) return input[a]->id < input[b]->id;
    return records[a] < records[b];
  });
  std::vector<const Document*> docs(n);
  for (std::size_t i = 0; i < n; ++i) docs[i] = input[canon[i]];

  // Phase 1: signatures.
  const MinHasher hasher(params.minhash);
  std::vector<MinHashSignature> sigs(n);
  std::vector<std::vector<std::uint64_t>> sets(params.exact_verify ? n : 0);
  std::vector<char> cached(n, 0);
  if (cache && !params.exact_verify) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = cache->find(docs[i]->id);
      if (it != cache->end() && it->second.family == params.minhash.fingerprint()) {
        sigs[i] = it->second;
        cached[i] = 1;
      }
    }
  }
  parallel_for(n, workers, [&](std::size_t i) {
    if (cached[i]) return;
    auto set = shingles(docs[i]->text, params.minhash.shingle_w);
    sigs[i] = hasher.sign(set, docs[i]->id);
    if (params.exact_verify) sets[i] = std::move(set);
  });
  if (cache) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!cached[i]) (*cache)[docs[i]->id] = sigs[i];
    }
  }

  // Phase 2: group by bucket key. Shingle-less documents share a bucket only
  // with identical texts.
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  keyed.reserve(n * params.bands);
  for (std::size_t i = 0; i < n; ++i) {
    if (sigs[i].empty) {
      keyed.emplace_back(mix64(hash64(docs[i]->text, kBandSeed) ^ 0xE3779B97ULL), i);
    } else {
      for (std::uint64_t key : lsh_bucket_keys(sigs[i], params.bands, params.rows)) keyed.emplace_back(key, i);
    }
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < keyed.size();) {
    std::size_t j = i;
    while (j < keyed.size() && keyed[j].first == keyed[i].first) ++j;
    for (std::size_t a = i; a < j; ++a) {
      for (std::size_t b = a + 1; b < j; ++b) {
        if (keyed[a].second != keyed[b].second) candidates.emplace_back(keyed[a].second, keyed[b].second);
      }
    }
    i = j;
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Phase 3: verify, then cluster.
  std::vector<double> similarity(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t c) {
    const auto [a, b] = candidates[c];
    similarity[c] = params.exact_verify ? exact_jaccard(sets[a], sets[b]) : estimate_jaccard(sigs[a], sigs[b]);
  });

  UnionFind uf(n);
  std::vector<std::size_t> kept_edges;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (params.verify && similarity[c] < params.jaccard_threshold) continue;
    kept_edges.push_back(c);
    uf.unite(candidates[c].first, candidates[c].second);
  }

  DedupResult result;
  result.stats.docs_in = n;
  result.stats.candidate_pairs = candidates.size();
  result.stats.verified_pairs = kept_edges.size();

  std::map<std::size_t, DupCluster> by_root;
  for (std::size_t c : kept_edges) {
    const auto [a, b] = candidates[c];
    auto& cluster = by_root[uf.find(a)];
    cluster.evidence.push_back({docs[a]->id, docs[b]->id, similarity[c]});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = by_root.find(uf.find(i));
    if (it != by_root.end()) it->second.members.push_back(docs[i]->id);
  }
  for (auto& [root, cluster] : by_root) {
    cluster.survivor = docs[root]->id;
    std::sort(cluster.evidence.begin(), cluster.evidence.end(), [](const DupEdge& x, const DupEdge& y) {
      return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    result.clusters.push_back(std::move(cluster));
  }
  result.stats.clusters = result.clusters.size();

  // Map back to input order.
  std::vector<std::size_t> position(n);
  for (std::size_t i = 0; i < n; ++i) position[canon[i]] = i;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = position[k];
    const std::size_t root = uf.find(i);
    if (root == i) {
      result.survivors.push_back(*input[k]);
    } else {
      Document d = *input[k];
      d.audit.push_back({"near_duplicate", Action::kDrop, "survivor " + docs[root]->id, Stage::kDedup});
      result.dropped.push_back(std::move(d));
    }
  }
  result.stats.docs_out = result.survivors.size();
  return result;
}

std::string serialize_cluster(const DupCluster& cluster) {
  nlohmann::ordered_json j;
  j["survivor"] = cluster.survivor;
  j["members"] = cluster.members;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : cluster.evidence) {
    edges.push_back({{"a", e.a}, {"b", e.b}, {"jaccard", e.jaccard}});
  }
  j["edges"] = std::move(edges);
  return j.dump();
}

void save_signatures(const std::filesystem::path& path, const SignatureCache& cache, const MinHashParams& params) {
  detail::ByteWriter w;
  w.raw(kSigMagic);
  w.u64(params.fingerprint());
  w.u64(params.k);
  w.u64(cache.size());
  for (const auto& [id, sig] : cache) {
    w.str(id);
    w.u32(sig.empty ? 1 : 0);
    for (std::uint64_t m : sig.mins) w.u64(m);
  }
  detail::write_binary_file(path, w.finish());
}

std::optional<SignatureCache> load_signatures(const std::filesystem::path& path, const MinHashParams& params) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  const std::string bytes = detail::read_binary_file(path);
  detail::ByteReader r(bytes, "signature cache");
  if (r.raw(kSigMagic.size()) != kSigMagic) throw FormatError("signature cache: bad magic");
  const std::uint64_t fingerprint = r.u64();
  const std::uint64_t k = r.u64();
  if (fingerprint != params.fingerprint() || k != params.k) return std::nullopt;
  SignatureCache cache;
  const std::uint64_t count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    MinHashSignature sig;
    sig.doc_id = r.str();
    sig.empty = r.u32() != 0;
    sig.family = fingerprint;
    sig.mins.resize(k);
    for (auto& m : sig.mins) m = r.u64();
    std::string id = sig.doc_id;
    cache.emplace(std::move(id), std::move(sig));
  }
  if (!r.done()) throw FormatError("signature cache: trailing bytes");
  return cache;
}

}  // namespace corpuskit
