#include "corpuskit/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <queue>

#include "corpuskit/error.hpp"

namespace corpuskit {

Lexicon::Lexicon(std::vector<std::string> words) : words_(std::move(words)) {
  std::erase_if(words_, [](const std::string& w) { return w.empty(); });
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  build();
}

Lexicon Lexicon::parse(std::string_view contents) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start <= contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty() && line.front() != '#') words.emplace_back(line);
    start = end + 1;
  }
  return Lexicon(std::move(words));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  const std::string contents(std::istreambuf_iterator<char>(in), {});
  return parse(contents);
}

std::int32_t Lexicon::child(std::int32_t node, unsigned char b) const {
  const auto& next = nodes_[static_cast<std::size_t>(node)].next;
  const auto it = std::lower_bound(next.begin(), next.end(), b,
                                   [](const auto& e, unsigned char v) { return e.first < v; });
  return it != next.end() && it->first == b ? it->second : -1;
}

void Lexicon::build() {
  nodes_.assign(1, Node{});
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::int32_t cur = 0;
    for (char ch : words_[w]) {
      const auto b = static_cast<unsigned char>(ch);
      std::int32_t nxt = child(cur, b);
      if (nxt < 0) {
        nxt = static_cast<std::int32_t>(nodes_.size());
        auto& edges = nodes_[static_cast<std::size_t>(cur)].next;
        edges.insert(std::lower_bound(edges.begin(), edges.end(), std::make_pair(b, std::int32_t{0}),
                                      [](const auto& x, const auto& y) { return x.first < y.first; }),
                     {b, nxt});
        nodes_.emplace_back();
      }
      cur = nxt;
    }
    nodes_[static_cast<std::size_t>(cur)].out = static_cast<std::int32_t>(w);
  }

  // Breadth-first failure links.
  std::queue<std::int32_t> queue;
  for (const auto& [b, n] : nodes_[0].next) {
    nodes_[static_cast<std::size_t>(n)].fail = 0;
    queue.push(n);
  }
  while (!queue.empty()) {
    const std::int32_t u = queue.front();
    queue.pop();
    for (const auto& [b, v] : nodes_[static_cast<std::size_t>(u)].next) {
      std::int32_t f = nodes_[static_cast<std::size_t>(u)].fail;
      while (f > 0 && child(f, b) < 0) f = nodes_[static_cast<std::size_t>(f)].fail;
      const std::int32_t c = child(f, b);
      auto& node = nodes_[static_cast<std::size_t>(v)];
      node.fail = (c >= 0 && c != v) ? c : 0;
      const auto& fail_node = nodes_[static_cast<std::size_t>(node.fail)];
      node.out_link = fail_node.out >= 0 ? node.fail : fail_node.out_link;
      queue.push(v);
    }
  }
}

template <typename Fn>
void Lexicon::scan(std::string_view text, Fn&& on_match) const {
  if (words_.empty()) return;
  std::int32_t cur = 0;
  for (char ch : text) {
    const auto b = static_cast<unsigned char>(ch);
    std::int32_t nxt;
    while ((nxt = child(cur, b)) < 0 && cur != 0) cur = nodes_[static_cast<std::size_t>(cur)].fail;
    cur = nxt < 0 ? 0 : nxt;
    for (std::int32_t n = nodes_[static_cast<std::size_t>(cur)].out >= 0
                              ? cur
                              : nodes_[static_cast<std::size_t>(cur)].out_link;
         n >= 0; n = nodes_[static_cast<std::size_t>(n)].out_link) {
      if (!on_match(static_cast<std::size_t>(nodes_[static_cast<std::size_t>(n)].out))) return;
    }
  }
}

std::vector<std::size_t> Lexicon::distinct_matches(std::string_view text) const {
  std::vector<bool> seen(words_.size(), false);
  scan(text, [&](std::size_t w) {
    seen[w] = true;
    return true;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i]) out.push_back(i);
  }
  return out;
}

std::size_t Lexicon::count_distinct(std::string_view text, std::size_t limit) const {
  std::vector<bool> seen(words_.size(), false);
  std::size_t count = 0;
  scan(text, [&](std::size_t w) {
    if (!seen[w]) {
      seen[w] = true;
      ++count;
    }
    return count < limit;
  });
  return count;
}

}  // namespace corpuskit
