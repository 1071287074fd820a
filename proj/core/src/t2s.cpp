#include "corpuskit/t2s.hpp"

#include <fstream>
#include <iterator>

#include "corpuskit/error.hpp"
#include "corpuskit/utf8.hpp"

namespace corpuskit {

namespace embedded {
extern const std::string_view t2s_tsv;
}

ConversionTable ConversionTable::parse(std::string_view tsv) {
  std::unordered_map<char32_t, char32_t> map;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < tsv.size()) {
    std::size_t end = tsv.find('\n', start);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError("t2s table: missing tab", lineno);
    const std::u32string from = utf8::decode(line.substr(0, tab));
    const std::u32string to = utf8::decode(line.substr(tab + 1));
    if (from.size() != 1 || to.size() != 1) {
      throw FormatError("t2s table: entries must be single characters", lineno);
    }
    map[from[0]] = to[0];
  }
  return ConversionTable(std::move(map));
}

ConversionTable ConversionTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open t2s table " + path.string());
  const std::string contents(std::istreambuf_iterator<char>(in), {});
  return parse(contents);
}

const ConversionTable& ConversionTable::bundled() {
  static const ConversionTable table = parse(embedded::t2s_tsv);
  return table;
}

std::string t2s_convert(std::string_view text, const ConversionTable& table) {
  // Every mapped scalar lies outside ASCII; most web text has long ASCII runs.
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto b = static_cast<unsigned char>(text[i]);
    if (b < 0x80) {
      out.push_back(static_cast<char>(b));
      ++i;
      continue;
    }
    std::size_t len = (b & 0xE0) == 0xC0 ? 2 : (b & 0xF0) == 0xE0 ? 3 : (b & 0xF8) == 0xF0 ? 4 : 1;
    if (i + len > text.size()) len = 1;
    const std::u32string c = utf8::decode(text.substr(i, len));
    if (c.size() == 1 && table.contains(c[0])) {
      utf8::append(out, table.map(c[0]));
    } else {
      out.append(text.substr(i, len));
    }
    i += len;
  }
  return out;
}

}  // namespace corpuskit
