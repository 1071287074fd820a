#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "corpuskit/dedup.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/hash.hpp"
#include "oracles.hpp"

namespace ck = corpuskit;

namespace {

ck::Document doc_of(std::string text, ck::Source s = ck::Source::kNews) { return ck::make_document(s, std::move(text)); }

ck::MinHashParams family(std::uint64_t seed, std::size_t k = 128) {
  ck::MinHashParams p;
  p.k = k;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(Shingles, Examples) {
  EXPECT_EQ(ck::shingles("abcd", 2).size(), 3u);
  EXPECT_EQ(ck::shingles("aaaa", 2).size(), 1u);
  EXPECT_TRUE(ck::shingles("a", 2).empty());
  EXPECT_EQ(ck::shingles("a  b\n\nc", 3), ck::shingles("a b c", 3));
  const auto s = ck::shingles("中文文本去重测试", 5);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(s.size(), 4u);
}

TEST(Shingles, SizeMatchesStringOracle) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 300; ++i) {
    const std::string t = ck::testing::random_string(rng, U"甲乙丙 a\n", rng() % 40);
    EXPECT_EQ(ck::shingles(t, 3).size(), ck::testing::char_shingle_set(t, 3).size()) << t;
  }
}

TEST(MinHash, IdenticalSetsAndEmptySets) {
  const std::vector<std::uint64_t> a = {1, 2, 3, 4};
  const auto p = family(1);
  EXPECT_EQ(ck::minhash(a, p), ck::minhash(a, p));
  EXPECT_DOUBLE_EQ(ck::estimate_jaccard(ck::minhash(a, p), ck::minhash(a, p)), 1.0);
  const auto empty = ck::minhash({}, p);
  EXPECT_TRUE(empty.empty);
  EXPECT_DOUBLE_EQ(ck::estimate_jaccard(empty, empty), 1.0);
  EXPECT_DOUBLE_EQ(ck::estimate_jaccard(empty, ck::minhash(a, p)), 0.0);
}

TEST(MinHash, FamilyMismatchIsError) {
  const std::vector<std::uint64_t> a = {1, 2, 3};
  EXPECT_THROW(ck::estimate_jaccard(ck::minhash(a, family(1)), ck::minhash(a, family(2))), ck::ConfigError);
}

TEST(MinHash, MeanEstimateNearOneThird) {
  std::mt19937_64 rng(12);
  const auto pair = ck::testing::make_set_pair(rng, 100, 100, 100);
  std::set<std::uint64_t> sa(pair.a.begin(), pair.a.end());
  std::set<std::uint64_t> sb(pair.b.begin(), pair.b.end());
  const double truth = ck::testing::brute_jaccard(sa, sb);
  ASSERT_NEAR(truth, 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(ck::exact_jaccard(pair.a, pair.b), truth);
  double sum = 0;
  for (std::uint64_t f = 0; f < 200; ++f) {
    const auto p = family(1000 + f);
    sum += ck::estimate_jaccard(ck::minhash(pair.a, p), ck::minhash(pair.b, p));
  }
  EXPECT_NEAR(sum / 200, truth, 0.05);
}

TEST(MinHash, DisjointSetsEstimateNearZero) {
  std::mt19937_64 rng(13);
  const auto pair = ck::testing::make_set_pair(rng, 0, 1000, 1000);
  const auto p = family(7);
  EXPECT_LE(ck::estimate_jaccard(ck::minhash(pair.a, p), ck::minhash(pair.b, p)), 0.05);
}

TEST(Lsh, KeysAndValidation) {
  const std::vector<std::uint64_t> a = {10, 20, 30};
  const auto sig = ck::minhash(a, family(3));
  const auto k1 = ck::lsh_bucket_keys(sig, 32, 4);
  EXPECT_EQ(k1.size(), 32u);
  EXPECT_EQ(k1, ck::lsh_bucket_keys(ck::minhash(a, family(3)), 32, 4));
  EXPECT_THROW(ck::lsh_bucket_keys(sig, 30, 4), ck::ConfigError);
  EXPECT_TRUE(ck::lsh_bucket_keys(ck::minhash({}, family(3)), 32, 4).empty());
}

TEST(Lsh, DifferentSignaturesDifferInEveryBand) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 50; ++t) {
    ck::MinHashSignature a{"a", {}, 1, false};
    ck::MinHashSignature b{"b", {}, 1, false};
    for (int i = 0; i < 128; ++i) {
      a.mins.push_back(rng());
      b.mins.push_back(rng());
    }
    const auto ka = ck::lsh_bucket_keys(a, 32, 4);
    const auto kb = ck::lsh_bucket_keys(b, 32, 4);
    for (std::size_t i = 0; i < ka.size(); ++i) EXPECT_NE(ka[i], kb[i]);
  }
}

TEST(Lsh, ClosedForm) {
  EXPECT_NEAR(ck::lsh_candidate_probability(0.8, 32, 4), 1.0 - std::pow(1.0 - 0.4096, 32), 1e-15);
  EXPECT_NEAR(ck::lsh_candidate_probability(0.8, 32, 4), 1.0, 1e-6);
  EXPECT_NEAR(ck::lsh_candidate_probability(0.3, 32, 4), 0.22915, 1e-5);  // 1 - 0.9919^32
}

TEST(DedupParams, Validate) {
  ck::DedupParams p;
  EXPECT_NO_THROW(p.validate());
  p.bands = 16;
  EXPECT_THROW(p.validate(), ck::ConfigError);
  p = {};
  p.jaccard_threshold = 0.0;
  EXPECT_THROW(p.validate(), ck::ConfigError);
}

TEST(Deduplicate, UniqueDocsPassThrough) {
  std::mt19937_64 rng(15);
  std::vector<std::vector<ck::Document>> shards(1);
  for (int i = 0; i < 100; ++i) shards[0].push_back(doc_of(ck::testing::cjk_filler(rng, 200)));
  const auto r = ck::deduplicate(shards, {});
  EXPECT_TRUE(r.clusters.empty());
  EXPECT_EQ(r.survivors, shards[0]);
}

TEST(Deduplicate, IdenticalDocsSmallerIdSurvives) {
  std::vector<std::vector<ck::Document>> shards = {
      {doc_of("完全相同的一段中文文本内容", ck::Source::kNews)},
      {doc_of("完全相同的一段中文文本内容", ck::Source::kEbooks)}};
  const auto r = ck::deduplicate(shards, {});
  ASSERT_EQ(r.clusters.size(), 1u);
  EXPECT_EQ(r.clusters[0].members.size(), 2u);
  const std::string smaller = std::min(shards[0][0].id, shards[1][0].id);
  EXPECT_EQ(r.clusters[0].survivor, smaller);
  ASSERT_EQ(r.survivors.size(), 1u);
  EXPECT_EQ(r.survivors[0].id, smaller);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_EQ(r.dropped[0].audit.back().rule_id, "near_duplicate");
  EXPECT_EQ(r.dropped[0].audit.back().stage, ck::Stage::kDedup);
}

TEST(Deduplicate, EmptyShingleDocsOnlyMatchIdenticalText) {
  std::vector<std::vector<ck::Document>> shards = {{doc_of("短"), doc_of("短", ck::Source::kEbooks), doc_of("字")}};
  const auto r = ck::deduplicate(shards, {});
  EXPECT_EQ(r.survivors.size(), 2u);
  EXPECT_EQ(r.clusters.size(), 1u);
}

namespace {

std::vector<ck::Document> planted_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ck::Document> docs;
  for (int i = 0; i < 60; ++i) docs.push_back(doc_of(ck::testing::cjk_filler(rng, 300)));
  for (int i = 0; i < 10; ++i) {
    std::u32string t = ck::testing::to_u32(docs[i].text);
    t[150] = U'変';
    docs.push_back(doc_of(ck::testing::to_utf8(t), ck::Source::kCommonCrawl));
  }
  return docs;
}

}  // namespace

TEST(Deduplicate, ShardOrderDoesNotMatter) {
  const auto docs = planted_corpus(16);
  std::vector<std::vector<ck::Document>> forward = {{docs.begin(), docs.begin() + 35}, {docs.begin() + 35, docs.end()}};
  std::vector<ck::Document> rev(docs.rbegin(), docs.rend());
  std::vector<std::vector<ck::Document>> backward = {{rev.begin(), rev.begin() + 20}, {rev.begin() + 20, rev.end()}};
  const auto a = ck::deduplicate(forward, {}, 1);
  const auto b = ck::deduplicate(backward, {}, 3);
  EXPECT_EQ(a.clusters, b.clusters);
  std::set<std::string> sa, sb;
  for (const auto& d : a.survivors) sa.insert(d.id);
  for (const auto& d : b.survivors) sb.insert(d.id);
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(a.clusters.size(), 10u);
}

TEST(Deduplicate, ClustersPartitionAndSurvivorsNeverDropped) {
  const auto docs = planted_corpus(17);
  const std::vector<std::vector<ck::Document>> shards = {docs};
  const auto r = ck::deduplicate(shards, {});
  std::set<std::string> flagged;
  std::set<std::string> survivors;
  for (const auto& c : r.clusters) {
    EXPECT_TRUE(std::binary_search(c.members.begin(), c.members.end(), c.survivor));
    EXPECT_EQ(c.survivor, c.members.front());
    for (const auto& m : c.members) EXPECT_TRUE(flagged.insert(m).second);
  }
  for (const auto& d : r.survivors) survivors.insert(d.id);
  for (const auto& d : r.dropped) EXPECT_FALSE(survivors.count(d.id));
  EXPECT_EQ(r.survivors.size() + r.dropped.size(), docs.size());
}

TEST(Deduplicate, IdempotentSecondPass) {
  const auto docs = planted_corpus(18);
  const std::vector<std::vector<ck::Document>> shards = {docs};
  const auto first = ck::deduplicate(shards, {});
  const std::vector<std::vector<ck::Document>> again = {first.survivors};
  EXPECT_TRUE(ck::deduplicate(again, {}).dropped.empty());
}

TEST(Deduplicate, ExactVerifyAgreesOnPlantedPairs) {
  ck::DedupParams p;
  p.exact_verify = true;
  const std::vector<std::vector<ck::Document>> shards = {planted_corpus(19)};
  const auto r = ck::deduplicate(shards, p);
  EXPECT_EQ(r.clusters.size(), 10u);
  for (const auto& c : r.clusters) {
    for (const auto& e : c.evidence) EXPECT_GE(e.jaccard, 0.8);
  }
}

TEST(SignatureCache, RoundTripAndParamMismatch) {
  const std::vector<std::vector<ck::Document>> shards = {planted_corpus(20)};
  ck::SignatureCache cache;
  const auto r1 = ck::deduplicate(shards, {}, 1, &cache);
  EXPECT_EQ(cache.size(), 70u);
  const auto path = std::filesystem::temp_directory_path() / "corpuskit_sig_test.bin";
  ck::save_signatures(path, cache, ck::DedupParams{}.minhash);
  auto loaded = ck::load_signatures(path, ck::DedupParams{}.minhash);
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(*loaded, cache);
  EXPECT_FALSE(ck::load_signatures(path, family(123)).has_value());
  EXPECT_FALSE(ck::load_signatures("/nonexistent/sig.bin", family(1)).has_value());
  const auto r2 = ck::deduplicate(shards, {}, 1, &*loaded);
  EXPECT_EQ(r1.clusters, r2.clusters);
}

TEST(SerializeCluster, ContainsSurvivorMembersAndEdges) {
  ck::DupCluster c{{"a", "b"}, "a", {{"a", "b", 0.875}}};
  const std::string s = ck::serialize_cluster(c);
  EXPECT_NE(s.find("\"survivor\":\"a\""), std::string::npos);
  EXPECT_NE(s.find("0.875"), std::string::npos);
}
