#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "corpuskit/error.hpp"
#include "corpuskit/ngram_lm.hpp"
#include "corpuskit/quality_eval.hpp"
#include "corpuskit/utf8.hpp"
#include "oracles.hpp"

namespace ck = corpuskit;

namespace {

std::vector<std::string> lines(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

// Sentences from a small fixed grammar: predictable, so a probe trained on
// them has low perplexity on more of the same.
std::vector<std::string> grammar_corpus(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> subj = {"我们", "他们", "老师", "学生", "工人"};
  static const std::vector<std::string> verb = {"喜欢", "研究", "讨论", "建设", "记录"};
  static const std::vector<std::string> obj = {"历史", "城市", "科学", "河流", "文化"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (int k = 0; k < 4; ++k) s += subj[rng() % 5] + verb[rng() % 5] + obj[rng() % 5] + "。";
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(NGram, UnigramSymmetry) {
  const auto lm = ck::NGramLM::train(lines({"ab"}), 1, ck::Smoothing::add_k(0));
  EXPECT_DOUBLE_EQ(lm.prob(U"", U'a'), lm.prob(U"", U'b'));
}

TEST(NGram, HandCountedBigrams) {
  const auto lm = ck::NGramLM::train(lines({"aaab"}), 2, ck::Smoothing::add_k(0));
  EXPECT_NEAR(lm.prob(U"a", U'a'), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(lm.prob(U"a", U'b'), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(lm.prob(U"b", ck::NGramLM::kEos), 1.0);
}

TEST(NGram, TrainingIsDeterministicAndParallelSafe) {
  std::mt19937_64 rng(1);
  const auto corpus = grammar_corpus(rng, 200);
  const auto a = ck::NGramLM::train(corpus, 3, ck::Smoothing::add_k(0.5));
  EXPECT_EQ(a, ck::NGramLM::train(corpus, 3, ck::Smoothing::add_k(0.5)));
  EXPECT_EQ(a, ck::NGramLM::train(corpus, 3, ck::Smoothing::add_k(0.5), 4));
}

TEST(NGram, InvalidParameters) {
  EXPECT_THROW(ck::NGramLM::train(lines({"a"}), 0, ck::Smoothing::add_k(1)), ck::ConfigError);
  EXPECT_THROW(ck::NGramLM::train({}, 2, ck::Smoothing::add_k(1)), ck::ConfigError);
  EXPECT_THROW(ck::NGramLM::train(lines({"a"}), 2, ck::Smoothing::add_k(-1)), ck::ConfigError);
  EXPECT_THROW(ck::NGramLM::train(lines({"a"}), 2, ck::Smoothing::stupid_backoff(1.5)), ck::ConfigError);
}

TEST(NGram, AddKDistributionsSumToOne) {
  std::mt19937_64 rng(2);
  const auto corpus = grammar_corpus(rng, 50);
  const auto lm = ck::NGramLM::train(corpus, 3, ck::Smoothing::add_k(0.1));
  std::set<char32_t> vocab;
  for (const auto& s : corpus) {
    for (char32_t c : ck::utf8::decode(s)) vocab.insert(c);
  }
  std::vector<char32_t> outcomes(vocab.begin(), vocab.end());
  outcomes.push_back(ck::NGramLM::kEos);
  outcomes.push_back(ck::NGramLM::kUnk);
  const std::u32string bos2 = {ck::NGramLM::kBos, ck::NGramLM::kBos};
  for (const std::u32string& ctx : {bos2, std::u32string(U"我们"), std::u32string(U"。我"), std::u32string(U"未见")}) {
    double sum = 0;
    for (char32_t c : outcomes) {
      const double p = lm.prob(ctx, c);
      EXPECT_GT(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Perplexity, UniformModelEqualsVocabularySize) {
  const auto lm = ck::NGramLM::uniform(U"abcdefg你好");
  ASSERT_EQ(lm.vocab_size(), 11u);
  EXPECT_EQ(ck::perplexity(lm, lines({"abc", "你好世界", "zzz"})), 11.0);
}

TEST(NGram, LogProbAgreesWithProb) {
  std::mt19937_64 rng(9);
  const auto corpus = grammar_corpus(rng, 50);
  for (const auto& smoothing : {ck::Smoothing::add_k(0.5), ck::Smoothing::stupid_backoff(0.4)}) {
    const auto lm = ck::NGramLM::train(corpus, 3, smoothing);
    for (const std::u32string ctx : {U"", U"我", U"我们", U"zz", U"学生"}) {
      for (char32_t next : {U'们', U'喜', U'x', ck::NGramLM::kEos}) {
        EXPECT_NEAR(static_cast<double>(lm.log_prob(ctx, next)), std::log(lm.prob(ctx, next)), 1e-12);
      }
    }
  }
}

TEST(Perplexity, CertainModelIsOne) {
  const auto lm = ck::NGramLM::train(lines({"a"}), 2, ck::Smoothing::add_k(0));
  EXPECT_DOUBLE_EQ(ck::perplexity(lm, lines({"a"})), 1.0);
}

TEST(Perplexity, ZeroProbabilityAndEmptyDev) {
  const auto lm = ck::NGramLM::train(lines({"ab"}), 2, ck::Smoothing::add_k(0));
  EXPECT_THROW(ck::perplexity(lm, lines({"ba"})), ck::Error);
  EXPECT_THROW(ck::perplexity(lm, {}), ck::ConfigError);
}

TEST(Perplexity, TrainingSetAdvantageAndRange) {
  std::mt19937_64 rng(3);
  const auto train = grammar_corpus(rng, 100);
  std::vector<std::string> held;
  for (int i = 0; i < 20; ++i) held.push_back(ck::testing::cjk_filler(rng, 30));
  const auto lm = ck::NGramLM::train(train, 2, ck::Smoothing::add_k(0.01));
  const double self = ck::perplexity(lm, train);
  const double other = ck::perplexity(lm, held);
  EXPECT_LE(self, other);
  EXPECT_GE(self, 1.0);
  EXPECT_LE(self, static_cast<double>(lm.vocab_size() + 1));
}

TEST(Perplexity, ParallelScoringMatchesSerial) {
  std::mt19937_64 rng(4);
  const auto train = grammar_corpus(rng, 100);
  const auto dev = grammar_corpus(rng, 64);
  const auto lm = ck::NGramLM::train(train, 3, ck::Smoothing::stupid_backoff());
  EXPECT_EQ(ck::perplexity(lm, dev, 1), ck::perplexity(lm, dev, 4));
}

TEST(NGram, SaveLoadRoundTrip) {
  std::mt19937_64 rng(5);
  const auto lm = ck::NGramLM::train(grammar_corpus(rng, 30), 3, ck::Smoothing::stupid_backoff(0.4));
  const auto path = std::filesystem::temp_directory_path() / "corpuskit_probe.bin";
  lm.save(path);
  EXPECT_EQ(ck::NGramLM::load(path), lm);
  std::string bytes = lm.to_bytes();
  bytes[20] ^= 1;
  EXPECT_THROW(ck::NGramLM::from_bytes(bytes), ck::Error);
}

TEST(CompareConfigs, TieReflexiveAndAntisymmetric) {
  std::mt19937_64 rng(6);
  const auto a = grammar_corpus(rng, 100);
  const auto dev = grammar_corpus(rng, 20);
  std::vector<std::string> b = a;
  for (std::size_t i = 0; i < b.size(); i += 3) b[i] = ck::testing::cjk_filler(rng, 30);
  const ck::ProbeParams p;
  EXPECT_EQ(ck::compare_configs(a, a, dev, p).better, ck::Better::kTie);
  const auto ab = ck::compare_configs(a, b, dev, p);
  const auto ba = ck::compare_configs(b, a, dev, p);
  EXPECT_EQ(ab.better, ck::Better::kA);
  EXPECT_EQ(ba.better, ck::Better::kB);
  EXPECT_EQ(ab.ppl_a, ba.ppl_b);
  EXPECT_LT(ab.ppl_a, ab.ppl_b);
}

TEST(CompareConfigs, ToleranceControlsTies) {
  std::mt19937_64 rng(7);
  const auto a = grammar_corpus(rng, 100);
  auto b = a;
  b[0] = ck::testing::cjk_filler(rng, 30);
  const auto dev = grammar_corpus(rng, 20);
  ck::ProbeParams p;
  p.tie_tolerance = 0.5;
  EXPECT_EQ(ck::compare_configs(a, b, dev, p).better, ck::Better::kTie);
}

TEST(SampleIndices, PermutationDeterminismAndErrors) {
  auto perm = ck::sample_indices(50, 50, 1);
  std::sort(perm.begin(), perm.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(perm[i], i);
  EXPECT_EQ(ck::sample_indices(1000, 10, 9), ck::sample_indices(1000, 10, 9));
  EXPECT_THROW(ck::sample_indices(5, 6, 1), ck::ConfigError);
}

// Two independent samples of n from N overlap n^2/N in expectation.
TEST(SampleIndices, OverlapMatchesHypergeometricMean) {
  const std::size_t N = 2000, n = 100;
  double total = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    auto a = ck::sample_indices(N, n, 2 * t + 1);
    auto b = ck::sample_indices(N, n, 2 * t + 2);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::size_t> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    total += static_cast<double>(both.size());
  }
  EXPECT_NEAR(total / trials, static_cast<double>(n * n) / N, 0.5);
}

TEST(ManualReview, ExcerptsAndRubricFields) {
  std::vector<ck::Document> docs;
  for (int i = 0; i < 20; ++i) docs.push_back(ck::make_document(ck::Source::kNews, std::string(600 * 3, 'x') + std::to_string(i)));
  docs[0].text = std::string(3, 'x');
  const auto items = ck::sample_for_manual_review(docs, 20, 3);
  ASSERT_EQ(items.size(), 20u);
  for (const auto& it : items) EXPECT_LE(ck::utf8::count_scalars(it.excerpt), 500u);
  EXPECT_THROW(ck::sample_for_manual_review(docs, 21, 3), ck::ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "corpuskit_review.jsonl";
  ck::write_review_file(path, items);
  std::ifstream in(path);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.at("smoothness").is_null());
    EXPECT_TRUE(j.at("advertisement").is_null());
    EXPECT_TRUE(j.at("repeated_short_sentences").is_null());
    EXPECT_TRUE(j.at("spam").is_null());
    EXPECT_TRUE(j.contains("doc_id"));
    ++count;
  }
  EXPECT_EQ(count, 20u);
}
