#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

struct ShardManifest {
  std::uint64_t doc_count = 0;
  std::uint64_t byte_count = 0;  // payload bytes
  std::uint64_t checksum = 0;    // hash64 of the payload
  std::map<Source, std::uint64_t> source_histogram;

  friend bool operator==(const ShardManifest&, const ShardManifest&) = default;
};

// Sidecar path "<shard>.manifest".
std::filesystem::path manifest_path(const std::filesystem::path& shard);

// Writes one serialized document per line plus the manifest sidecar.
ShardManifest write_shard(std::span<const Document> docs, const std::filesystem::path& path);

// Reads and verifies a shard. Throws ChecksumError naming the shard on
// checksum or count mismatch, IoError when either file is missing.
std::vector<Document> read_shard(const std::filesystem::path& path);

ShardManifest read_manifest(const std::filesystem::path& shard);

// Shards of a stage directory ("part-*.jsonl"), sorted by name.
std::vector<std::filesystem::path> list_shards(const std::filesystem::path& dir);

// Splits docs into part-00000.jsonl, part-00001.jsonl, ... of at most
// shard_size documents. Always writes at least one (possibly empty) shard.
std::vector<ShardManifest> write_shards(std::span<const Document> docs,
                                        const std::filesystem::path& dir,
                                        std::size_t shard_size);

}  // namespace corpuskit
