#include "corpuskit/shard.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "corpuskit/error.hpp"
#include "corpuskit/hash.hpp"

namespace corpuskit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

fs::path manifest_path(const fs::path& shard) {
  fs::path p = shard;
  p += ".manifest";
  return p;
}

ShardManifest write_shard(std::span<const Document> docs, const fs::path& path) {
  std::string payload;
  ShardManifest m;
  for (const auto& d : docs) {
    payload += serialize(d);
    payload.push_back('\n');
    ++m.source_histogram[d.source];
  }
  m.doc_count = docs.size();
  m.byte_count = payload.size();
  m.checksum = hash64(payload);

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, payload);

  ordered_json j;
  j["doc_count"] = m.doc_count;
  j["byte_count"] = m.byte_count;
  j["checksum"] = to_hex(m.checksum);
  ordered_json hist = ordered_json::object();
  for (const auto& [s, n] : m.source_histogram) hist[std::string(source_name(s))] = n;
  j["source_histogram"] = std::move(hist);
  write_file(manifest_path(path), j.dump(2) + "\n");
  return m;
}

ShardManifest read_manifest(const fs::path& shard) {
  const std::string text = read_file(manifest_path(shard));
  try {
    const auto j = ordered_json::parse(text);
    ShardManifest m;
    m.doc_count = j.at("doc_count").get<std::uint64_t>();
    m.byte_count = j.at("byte_count").get<std::uint64_t>();
    m.checksum = parse_hex64(j.at("checksum").get<std::string>());
    for (const auto& [k, v] : j.at("source_histogram").items()) {
      const auto s = parse_source(k);
      if (!s) throw FormatError("unknown source '" + k + "' in " + manifest_path(shard).string());
      m.source_histogram[*s] = v.get<std::uint64_t>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad manifest " + manifest_path(shard).string() + ": " + e.what());
  }
}

std::vector<Document> read_shard(const fs::path& path) {
  const ShardManifest m = read_manifest(path);
  const std::string payload = read_file(path);
  if (payload.size() != m.byte_count || hash64(payload) != m.checksum) {
    throw ChecksumError("checksum mismatch in shard " + path.string());
  }
  std::vector<Document> docs;
  docs.reserve(m.doc_count);
  std::size_t start = 0;
  while (start < payload.size()) {
    std::size_t end = payload.find('\n', start);
    if (end == std::string::npos) end = payload.size();
    docs.push_back(deserialize(std::string_view(payload).substr(start, end - start)));
    start = end + 1;
  }
  if (docs.size() != m.doc_count) {
    throw ChecksumError("record count mismatch in shard " + path.string());
  }
  return docs;
}

std::vector<fs::path> list_shards(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("part-") && name.ends_with(".jsonl")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ShardManifest> write_shards(std::span<const Document> docs, const fs::path& dir,
                                        std::size_t shard_size) {
  if (shard_size == 0) throw ConfigError("shard_size must be positive");
  fs::create_directories(dir);
  for (const auto& old : list_shards(dir)) {
    fs::remove(old);
    fs::remove(manifest_path(old));
  }
  std::vector<ShardManifest> manifests;
  std::size_t index = 0;
  std::size_t offset = 0;
  do {
    const std::size_t n = std::min(shard_size, docs.size() - offset);
    char name[32];
    std::snprintf(name, sizeof(name), "part-%05zu.jsonl", index++);
    manifests.push_back(write_shard(docs.subspan(offset, n), dir / name));
    offset += n;
  } while (offset < docs.size());
  return manifests;
}

}  // namespace corpuskit
