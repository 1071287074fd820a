#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "corpuskit/cleaner.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/tokenizer.hpp"
#include "corpuskit/utf8.hpp"

namespace ck = corpuskit;

namespace {

std::string filler(std::mt19937_64& rng, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    ck::utf8::append(out, static_cast<char32_t>(0x4E00 + rng() % 500));
    if (i % 37 == 36) out += "。";
    if (i % 120 == 119) out += "\n";
  }
  return out;
}

std::vector<std::string> corpus(std::size_t docs, std::size_t chars) {
  std::mt19937_64 rng(1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < docs; ++i) out.push_back(filler(rng, chars));
  return out;
}

void BM_CleanDocument(benchmark::State& state) {
  const auto texts = corpus(64, static_cast<std::size_t>(state.range(0)));
  const ck::CleanConfig cfg;
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& t : texts) {
      benchmark::DoNotOptimize(ck::clean_document(ck::make_document(ck::Source::kCommonCrawl, t), cfg));
      bytes += t.size();
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_CleanDocument)->Arg(300)->Arg(3000);

void BM_MinHashSign(benchmark::State& state) {
  const auto texts = corpus(64, 1000);
  ck::MinHashParams params;
  params.k = static_cast<std::size_t>(state.range(0));
  const ck::MinHasher hasher(params);
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& t : texts) {
      benchmark::DoNotOptimize(hasher.sign_text(t));
      bytes += t.size();
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_MinHashSign)->Arg(64)->Arg(128)->Arg(256);

void BM_BpeEncode(benchmark::State& state) {
  const auto train = corpus(200, 500);
  const auto model = ck::BpeModel::train(train, static_cast<std::size_t>(state.range(0)));
  const auto texts = corpus(32, 2000);
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& t : texts) {
      benchmark::DoNotOptimize(model.encode(t));
      bytes += t.size();
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_BpeEncode)->Arg(1000)->Arg(4000);

}  // namespace

BENCHMARK_MAIN();
