#include "corpuskit/tokenizer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <queue>
#include <set>
#include <unordered_set>

#include "corpuskit/error.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/utf8.hpp"

namespace corpuskit {

namespace {

constexpr std::uint64_t pair_key(TokenId a, TokenId b) { return (std::uint64_t{a} << 32) | b; }

std::size_t scalar_len(unsigned char b) {
  if (b < 0x80) return 1;
  if ((b & 0xE0) == 0xC0) return 2;
  if ((b & 0xF0) == 0xE0) return 3;
  if ((b & 0xF8) == 0xF0) return 4;
  return 1;
}

// Splits a piece into scalar byte ranges (invalid bytes stand alone).
std::vector<std::string_view> scalars_of(std::string_view piece) {
  std::vector<std::string_view> out;
  const auto offsets = utf8::scalar_offsets(piece);
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    out.push_back(piece.substr(offsets[i], offsets[i + 1] - offsets[i]));
  }
  return out;
}

std::string escape(const std::string& token, bool is_byte) {
  static constexpr char hex[] = "0123456789ABCDEF";
  if (is_byte) {
    const auto b = static_cast<unsigned char>(token[0]);
    return std::string("\\x") + hex[b >> 4] + hex[b & 0xF];
  }
  std::string out;
  for (char c : token) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Returns the token bytes and whether it names a byte token.
std::pair<std::string, bool> unescape(std::string_view s, std::size_t lineno) {
  if (s.size() == 4 && s[0] == '\\' && s[1] == 'x') {
    return {std::string(1, static_cast<char>(std::stoul(std::string(s.substr(2)), nullptr, 16))), true};
  }
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (++i >= s.size()) throw FormatError("bpe model: dangling escape", lineno);
    switch (s[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw FormatError("bpe model: unknown escape", lineno);
    }
  }
  return {out, false};
}

}  // namespace

std::vector<TokenId> CharTokenizer::encode(std::string_view text) const {
  const std::u32string s = utf8::decode(text);
  return {s.begin(), s.end()};
}

std::size_t CharTokenizer::count(std::string_view text) const { return utf8::count_scalars(text); }

std::vector<std::string_view> BpeModel::pieces(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t word_start = std::string_view::npos;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t len = std::min(scalar_len(static_cast<unsigned char>(text[i])), text.size() - i);
    const std::u32string c = utf8::decode(text.substr(i, len));
    const bool alone = c.size() == 1 && (utf8::is_space(c[0]) || utf8::is_punct(c[0]));
    if (alone) {
      if (word_start != std::string_view::npos) out.push_back(text.substr(word_start, i - word_start));
      word_start = std::string_view::npos;
      out.push_back(text.substr(i, len));
    } else if (word_start == std::string_view::npos) {
      word_start = i;
    }
    i += len;
  }
  if (word_start != std::string_view::npos) out.push_back(text.substr(word_start));
  return out;
}

BpeModel BpeModel::train(std::span<const std::string> corpus, std::size_t target_vocab, unsigned workers) {
  if (corpus.empty()) throw ConfigError("bpe training corpus is empty");

  // Piece frequencies, counted per chunk and merged in a fixed order.
  workers = std::max(1u, workers);
  const std::size_t chunks = std::min<std::size_t>(workers, corpus.size());
  std::vector<std::map<std::string, std::uint64_t>> partial(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    for (std::size_t d = corpus.size() * c / chunks; d < corpus.size() * (c + 1) / chunks; ++d) {
      for (const auto piece : pieces(corpus[d])) ++partial[c][std::string(piece)];
    }
  });
  std::map<std::string, std::uint64_t> piece_counts;
  for (auto& p : partial) {
    for (auto& [k, v] : p) piece_counts[k] += v;
  }

  std::set<std::string> alphabet;
  for (const auto& [piece, n] : piece_counts) {
    for (const auto s : scalars_of(piece)) alphabet.emplace(s);
  }

  BpeModel model;
  model.target_vocab_ = target_vocab;
  model.tokens_.reserve(target_vocab);
  for (std::size_t b = 0; b < kByteTokens; ++b) model.tokens_.emplace_back(1, static_cast<char>(b));
  for (const auto& s : alphabet) model.tokens_.push_back(s);
  model.alphabet_end_ = model.tokens_.size();
  if (target_vocab <= model.alphabet_end_) {
    throw ConfigError("target vocabulary (" + std::to_string(target_vocab) + ") must exceed the alphabet size (" +
                      std::to_string(model.alphabet_end_) + ")");
  }
  model.index();

  // Words as symbol sequences; single-symbol pieces can never merge.
  std::vector<std::vector<TokenId>> words;
  std::vector<std::uint64_t> freq;
  for (const auto& [piece, n] : piece_counts) {
    const auto scalars = scalars_of(piece);
    if (scalars.size() < 2) continue;
    std::vector<TokenId> w;
    for (const auto s : scalars) w.push_back(model.char_ids_.at(std::string(s)));
    words.push_back(std::move(w));
    freq.push_back(n);
  }

  std::unordered_map<std::uint64_t, std::int64_t> pair_freq;
  std::unordered_map<std::uint64_t, std::unordered_set<std::size_t>> where;
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t i = 0; i + 1 < words[w].size(); ++i) {
      const auto k = pair_key(words[w][i], words[w][i + 1]);
      pair_freq[k] += static_cast<std::int64_t>(freq[w]);
      where[k].insert(w);
    }
  }

  struct Entry {
    std::int64_t freq;
    TokenId left;
    TokenId right;
  };
  const auto& toks = model.tokens_;
  auto worse = [&toks](const Entry& x, const Entry& y) {
    if (x.freq != y.freq) return x.freq < y.freq;
    const int l = toks[x.left].compare(toks[y.left]);
    if (l != 0) return l > 0;
    return toks[x.right].compare(toks[y.right]) > 0;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (const auto& [k, f] : pair_freq) {
    heap.push({f, static_cast<TokenId>(k >> 32), static_cast<TokenId>(k & 0xFFFFFFFF)});
  }

  while (model.tokens_.size() < target_vocab && !heap.empty()) {
    const Entry top = heap.top();
    heap.pop();
    const auto key = pair_key(top.left, top.right);
    const auto it = pair_freq.find(key);
    if (it == pair_freq.end() || it->second != top.freq) continue;  // stale entry
    if (top.freq < 2) break;

    const auto merged = static_cast<TokenId>(model.tokens_.size());
    model.tokens_.push_back(model.tokens_[top.left] + model.tokens_[top.right]);
    model.merges_.emplace_back(top.left, top.right);

    std::vector<std::size_t> affected(where[key].begin(), where[key].end());
    std::sort(affected.begin(), affected.end());
    std::set<std::uint64_t> touched;
    for (std::size_t w : affected) {
      auto& word = words[w];
      const auto f = static_cast<std::int64_t>(freq[w]);
      for (std::size_t i = 0; i + 1 < word.size(); ++i) {
        const auto k = pair_key(word[i], word[i + 1]);
        pair_freq[k] -= f;
        touched.insert(k);
      }
      std::vector<TokenId> next;
      next.reserve(word.size());
      for (std::size_t i = 0; i < word.size();) {
        if (i + 1 < word.size() && word[i] == top.left && word[i + 1] == top.right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(word[i++]);
        }
      }
      word = std::move(next);
      for (std::size_t i = 0; i + 1 < word.size(); ++i) {
        const auto k = pair_key(word[i], word[i + 1]);
        pair_freq[k] += f;
        where[k].insert(w);
        touched.insert(k);
      }
    }
    for (std::uint64_t k : touched) {
      const auto jt = pair_freq.find(k);
      if (jt->second <= 0) {
        pair_freq.erase(jt);
        where.erase(k);
      } else {
        heap.push({jt->second, static_cast<TokenId>(k >> 32), static_cast<TokenId>(k & 0xFFFFFFFF)});
      }
    }
  }
  model.index();
  return model;
}

void BpeModel::index() {
  char_ids_.clear();
  merge_rank_.clear();
  for (std::size_t id = kByteTokens; id < alphabet_end_; ++id) char_ids_.emplace(tokens_[id], static_cast<TokenId>(id));
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    merge_rank_.emplace(pair_key(merges_[r].first, merges_[r].second), static_cast<std::uint32_t>(r));
  }
}

void BpeModel::encode_piece(std::string_view piece, std::vector<TokenId>& out) const {
  std::vector<TokenId> syms;
  for (const auto s : scalars_of(piece)) {
    const auto it = char_ids_.find(std::string(s));
    if (it != char_ids_.end()) {
      syms.push_back(it->second);
    } else {
      for (char b : s) syms.push_back(static_cast<unsigned char>(b));
    }
  }
  for (;;) {
    std::uint32_t best = UINT32_MAX;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      const auto it = merge_rank_.find(pair_key(syms[i], syms[i + 1]));
      if (it != merge_rank_.end() && it->second < best) best = it->second;
    }
    if (best == UINT32_MAX) break;
    const auto [left, right] = merges_[best];
    const auto merged = static_cast<TokenId>(alphabet_end_ + best);
    std::size_t w = 0;
    for (std::size_t i = 0; i < syms.size();) {
      if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
        syms[w++] = merged;
        i += 2;
      } else {
        syms[w++] = syms[i++];
      }
    }
    syms.resize(w);
  }
  out.insert(out.end(), syms.begin(), syms.end());
}

std::vector<TokenId> BpeModel::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (const auto piece : pieces(text)) encode_piece(piece, out);
  return out;
}

std::string BpeModel::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id >= tokens_.size()) throw FormatError("token id " + std::to_string(id) + " out of range");
    out += tokens_[id];
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> BpeModel::merge_strings() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [l, r] : merges_) out.emplace_back(tokens_[l], tokens_[r]);
  return out;
}

std::string BpeModel::to_text() const {
  std::string out = "corpuskit-bpe 1 target_vocab=" + std::to_string(target_vocab_) +
                    " alphabet=" + std::to_string(alphabet_end_) + " merges=" + std::to_string(merges_.size()) + "\n";
  for (std::size_t id = 0; id < tokens_.size(); ++id) {
    out += escape(tokens_[id], id < kByteTokens) + "\t" + std::to_string(id) + "\n";
  }
  out += "#merges\n";
  for (const auto& [l, r] : merges_) {
    out += escape(tokens_[l], l < kByteTokens) + "\t" + escape(tokens_[r], r < kByteTokens) + "\n";
  }
  return out;
}

BpeModel BpeModel::from_text(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty() || !lines[0].starts_with("corpuskit-bpe 1 ")) throw FormatError("bpe model: bad header", 1);
  BpeModel model;
  std::size_t alphabet = 0;
  std::size_t n_merges = 0;
  if (std::sscanf(std::string(lines[0]).c_str(), "corpuskit-bpe 1 target_vocab=%zu alphabet=%zu merges=%zu",
                  &model.target_vocab_, &alphabet, &n_merges) != 3) {
    throw FormatError("bpe model: bad header", 1);
  }
  std::map<std::string, TokenId> by_escaped;
  std::size_t i = 1;
  for (; i < lines.size() && lines[i] != "#merges"; ++i) {
    const std::size_t tab = lines[i].rfind('\t');
    if (tab == std::string_view::npos) throw FormatError("bpe model: bad vocab line", i + 1);
    const auto id = static_cast<TokenId>(std::stoul(std::string(lines[i].substr(tab + 1))));
    if (id != model.tokens_.size()) throw FormatError("bpe model: ids must be dense and ordered", i + 1);
    const auto [bytes, is_byte] = unescape(lines[i].substr(0, tab), i + 1);
    if (is_byte != (id < kByteTokens)) throw FormatError("bpe model: misplaced byte token", i + 1);
    by_escaped[std::string(lines[i].substr(0, tab))] = id;
    model.tokens_.push_back(bytes);
  }
  if (i == lines.size()) throw FormatError("bpe model: missing #merges section");
  model.alphabet_end_ = alphabet;
  if (alphabet < kByteTokens || alphabet + n_merges != model.tokens_.size()) {
    throw FormatError("bpe model: header counts do not match the vocabulary");
  }
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t tab = lines[i].find('\t');
    if (tab == std::string_view::npos) throw FormatError("bpe model: bad merge line", i + 1);
    const auto l = by_escaped.find(std::string(lines[i].substr(0, tab)));
    const auto r = by_escaped.find(std::string(lines[i].substr(tab + 1)));
    if (l == by_escaped.end() || r == by_escaped.end()) throw FormatError("bpe model: unknown merge token", i + 1);
    const std::size_t id = alphabet + model.merges_.size();
    if (id >= model.tokens_.size() || model.tokens_[id] != model.tokens_[l->second] + model.tokens_[r->second]) {
      throw FormatError("bpe model: merge does not reproduce the vocabulary", i + 1);
    }
    model.merges_.emplace_back(l->second, r->second);
  }
  if (model.merges_.size() != n_merges) throw FormatError("bpe model: merge count mismatch");
  model.index();
  return model;
}

void BpeModel::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_text();
}

BpeModel BpeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return from_text(std::string(std::istreambuf_iterator<char>(in), {}));
}

TokenStats count_tokens(std::span<const std::string> corpus, const Tokenizer& tokenizer, std::uint64_t bucket_width,
                        unsigned workers) {
  if (bucket_width == 0) throw ConfigError("histogram bucket width must be positive");
  TokenStats stats;
  stats.bucket_width = bucket_width;
  stats.doc_lengths.resize(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) { stats.doc_lengths[i] = tokenizer.count(corpus[i]); });
  for (std::uint64_t len : stats.doc_lengths) {
    stats.total += len;
    ++stats.histogram[len / bucket_width * bucket_width];
  }
  stats.docs = corpus.size();
  stats.mean_defined = stats.docs > 0;
  stats.mean_doc_len = stats.mean_defined ? static_cast<double>(stats.total) / static_cast<double>(stats.docs) : 0.0;
  return stats;
}

}  // namespace corpuskit
