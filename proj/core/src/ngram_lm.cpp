#include "corpuskit/ngram_lm.hpp"

#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/utf8.hpp"

namespace corpuskit {

namespace {

constexpr std::string_view kMagic = "CKNGRAM1";

std::vector<std::u32string_view> nonblank_lines(std::u32string_view text) {
  std::vector<std::u32string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(U'\n', start);
    if (end == std::u32string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    if (!std::all_of(line.begin(), line.end(), utf8::is_space)) out.push_back(line);
    start = end + 1;
  }
  return out;
}

// Pairwise summation in extended precision.
long double pairwise_sum(const long double* v, std::size_t n) {
  if (n <= 8) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace

NGramLM NGramLM::train(std::span<const std::string> corpus, unsigned n, Smoothing smoothing, unsigned workers) {
  if (n < 1) throw ConfigError("n-gram order must be at least 1");
  if (corpus.empty()) throw ConfigError("probe training corpus is empty");
  if (smoothing.kind == SmoothingKind::kAddK && !(smoothing.value >= 0.0)) {
    throw ConfigError("add-k smoothing needs k >= 0");
  }
  if (smoothing.kind == SmoothingKind::kStupidBackoff && !(smoothing.value > 0.0 && smoothing.value <= 1.0)) {
    throw ConfigError("stupid backoff factor must be within (0, 1]");
  }
  if (smoothing.kind == SmoothingKind::kUniform) throw ConfigError("use NGramLM::uniform for a uniform model");

  struct Partial {
    std::unordered_map<std::u32string, ContextCounts> counts;
    std::vector<char32_t> scalars;
  };
  workers = std::max(1u, workers);
  const std::size_t chunks = std::min<std::size_t>(workers, corpus.size());
  std::vector<Partial> partials(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    Partial& part = partials[c];
    const std::size_t begin = corpus.size() * c / chunks;
    const std::size_t end = corpus.size() * (c + 1) / chunks;
    std::u32string tokens;
    for (std::size_t d = begin; d < end; ++d) {
      const std::u32string text = utf8::decode(corpus[d]);
      for (const auto line : nonblank_lines(text)) {
        tokens.assign(n - 1, kBos);
        tokens += line;
        tokens.push_back(kEos);
        part.scalars.insert(part.scalars.end(), line.begin(), line.end());
        for (std::size_t i = n - 1; i < tokens.size(); ++i) {
          for (std::size_t m = 0; m < n; ++m) {
            auto& cc = part.counts[tokens.substr(i - m, m)];
            ++cc.total;
            ++cc.next[tokens[i]];
          }
        }
      }
      std::sort(part.scalars.begin(), part.scalars.end());
      part.scalars.erase(std::unique(part.scalars.begin(), part.scalars.end()), part.scalars.end());
    }
  });

  NGramLM lm;
  lm.n_ = n;
  lm.smoothing_ = smoothing;
  for (auto& part : partials) {
    lm.vocab_.insert(lm.vocab_.end(), part.scalars.begin(), part.scalars.end());
    for (auto& [ctx, cc] : part.counts) {
      auto& dst = lm.counts_[ctx];
      dst.total += cc.total;
      for (const auto& [tok, c] : cc.next) dst.next[tok] += c;
    }
  }
  std::sort(lm.vocab_.begin(), lm.vocab_.end());
  lm.vocab_.erase(std::unique(lm.vocab_.begin(), lm.vocab_.end()), lm.vocab_.end());
  if (lm.counts_.empty()) throw ConfigError("probe training corpus has no text");
  return lm;
}

NGramLM NGramLM::uniform(std::u32string_view scalars) {
  NGramLM lm;
  lm.n_ = 1;
  lm.smoothing_ = {SmoothingKind::kUniform, 0.0};
  lm.vocab_.assign(scalars.begin(), scalars.end());
  std::sort(lm.vocab_.begin(), lm.vocab_.end());
  lm.vocab_.erase(std::unique(lm.vocab_.begin(), lm.vocab_.end()), lm.vocab_.end());
  return lm;
}

bool NGramLM::in_vocab(char32_t c) const { return std::binary_search(vocab_.begin(), vocab_.end(), c); }

std::uint64_t NGramLM::count(std::u32string_view context, char32_t next, std::uint64_t* total) const {
  const auto it = counts_.find(std::u32string(context));
  if (it == counts_.end()) {
    *total = 0;
    return 0;
  }
  *total = it->second.total;
  const auto jt = it->second.next.find(next);
  return jt == it->second.next.end() ? 0 : jt->second;
}

double NGramLM::backoff_score(std::u32string_view context, char32_t next) const {
  double scale = 1.0;
  for (;;) {
    std::uint64_t total = 0;
    const std::uint64_t c = count(context, next, &total);
    if (context.empty()) {
      // Add-one unigram floor keeps every score positive.
      return scale * (static_cast<double>(c) + 1.0) /
             (static_cast<double>(total) + static_cast<double>(vocab_size()));
    }
    if (c > 0) return scale * static_cast<double>(c) / static_cast<double>(total);
    scale *= smoothing_.value;
    context.remove_prefix(1);
  }
}

double NGramLM::prob(std::u32string_view context, char32_t next) const {
  if (next != kEos && !in_vocab(next)) next = kUnk;
  if (context.size() > n_ - 1) context = context.substr(context.size() - (n_ - 1));
  const auto v = static_cast<double>(vocab_size());
  switch (smoothing_.kind) {
    case SmoothingKind::kUniform:
      return 1.0 / v;
    case SmoothingKind::kAddK: {
      std::uint64_t total = 0;
      const std::uint64_t c = count(context, next, &total);
      const double denom = static_cast<double>(total) + smoothing_.value * v;
      return denom == 0.0 ? 0.0 : (static_cast<double>(c) + smoothing_.value) / denom;
    }
    case SmoothingKind::kStupidBackoff:
      return backoff_score(context, next);
  }
  return 0.0;
}

long double NGramLM::log_prob(std::u32string_view context, char32_t next) const {
  if (next != kEos && !in_vocab(next)) next = kUnk;
  if (context.size() > n_ - 1) context = context.substr(context.size() - (n_ - 1));
  const auto v = static_cast<long double>(vocab_size());
  switch (smoothing_.kind) {
    case SmoothingKind::kUniform:
      return -std::log(v);
    case SmoothingKind::kAddK: {
      std::uint64_t total = 0;
      const std::uint64_t c = count(context, next, &total);
      const long double num = static_cast<long double>(c) + smoothing_.value;
      const long double den = static_cast<long double>(total) + smoothing_.value * v;
      if (num == 0.0L || den == 0.0L) return -INFINITY;
      return std::log(num) - std::log(den);
    }
    case SmoothingKind::kStupidBackoff: {
      long double backoffs = 0.0L;
      for (;;) {
        std::uint64_t total = 0;
        const std::uint64_t c = count(context, next, &total);
        if (context.empty()) {
          return backoffs * std::log(static_cast<long double>(smoothing_.value)) +
                 std::log(static_cast<long double>(c) + 1.0L) - std::log(static_cast<long double>(total) + v);
        }
        if (c > 0) {
          return backoffs * std::log(static_cast<long double>(smoothing_.value)) +
                 std::log(static_cast<long double>(c)) - std::log(static_cast<long double>(total));
        }
        backoffs += 1.0L;
        context.remove_prefix(1);
      }
    }
  }
  return -INFINITY;
}

std::vector<std::u32string> NGramLM::sentences(std::string_view text) const {
  std::vector<std::u32string> out;
  const std::u32string decoded = utf8::decode(text);
  for (const auto line : nonblank_lines(decoded)) {
    std::u32string tokens(n_ - 1, kBos);
    for (char32_t c : line) tokens.push_back(in_vocab(c) ? c : kUnk);
    tokens.push_back(kEos);
    out.push_back(std::move(tokens));
  }
  return out;
}

double perplexity(const NGramLM& lm, std::span<const std::string> dev, unsigned workers) {
  const std::size_t ctx = lm.order() - 1;
  std::vector<std::vector<long double>> per_doc(dev.size());
  parallel_for(dev.size(), workers, [&](std::size_t d) {
    for (const auto& tokens : lm.sentences(dev[d])) {
      for (std::size_t i = ctx; i < tokens.size(); ++i) {
        const long double lp = lm.log_prob(std::u32string_view(tokens).substr(i - ctx, ctx), tokens[i]);
        if (!std::isfinite(lp)) {
          throw Error("zero-probability event in dev text; train with add-k (k > 0) or stupid backoff");
        }
        per_doc[d].push_back(lp);
      }
    }
  });
  std::vector<long double> logs;
  for (auto& v : per_doc) logs.insert(logs.end(), v.begin(), v.end());
  if (logs.empty()) throw ConfigError("dev corpus has no text");
  const long double mean = -pairwise_sum(logs.data(), logs.size()) / static_cast<long double>(logs.size());
  return static_cast<double>(std::exp(mean));
}

std::string NGramLM::to_bytes() const {
  detail::ByteWriter w;
  w.raw(kMagic);
  w.u32(n_);
  w.u32(static_cast<std::uint32_t>(smoothing_.kind));
  w.f64(smoothing_.value);
  w.u64(vocab_.size());
  for (char32_t c : vocab_) w.u32(c);
  std::vector<const std::u32string*> keys;
  keys.reserve(counts_.size());
  for (const auto& [k, v] : counts_) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) { return *a < *b; });
  w.u64(keys.size());
  for (const auto* key : keys) {
    const auto& cc = counts_.at(*key);
    w.u32(static_cast<std::uint32_t>(key->size()));
    for (char32_t c : *key) w.u32(c);
    w.u64(cc.total);
    std::vector<std::pair<char32_t, std::uint64_t>> next(cc.next.begin(), cc.next.end());
    std::sort(next.begin(), next.end());
    w.u64(next.size());
    for (const auto& [tok, c] : next) {
      w.u32(tok);
      w.u64(c);
    }
  }
  return w.finish();
}

NGramLM NGramLM::from_bytes(std::string_view bytes) {
  detail::ByteReader r(bytes, "n-gram model");
  if (r.raw(kMagic.size()) != kMagic) throw FormatError("n-gram model: bad magic");
  NGramLM lm;
  lm.n_ = r.u32();
  const std::uint32_t kind = r.u32();
  if (kind > 2 || lm.n_ < 1) throw FormatError("n-gram model: bad header");
  lm.smoothing_ = {static_cast<SmoothingKind>(kind), r.f64()};
  lm.vocab_.resize(r.u64());
  for (auto& c : lm.vocab_) c = r.u32();
  const std::uint64_t n_ctx = r.u64();
  for (std::uint64_t i = 0; i < n_ctx; ++i) {
    std::u32string key(r.u32(), U'\0');
    for (auto& c : key) c = r.u32();
    auto& cc = lm.counts_[key];
    cc.total = r.u64();
    const std::uint64_t n_next = r.u64();
    for (std::uint64_t j = 0; j < n_next; ++j) {
      const char32_t tok = r.u32();
      cc.next[tok] = r.u64();
    }
  }
  if (!r.done()) throw FormatError("n-gram model: trailing bytes");
  return lm;
}

void NGramLM::save(const std::filesystem::path& path) const { detail::write_binary_file(path, to_bytes()); }

NGramLM NGramLM::load(const std::filesystem::path& path) { return from_bytes(detail::read_binary_file(path)); }

}  // namespace corpuskit
