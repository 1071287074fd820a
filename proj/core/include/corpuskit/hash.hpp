#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace corpuskit {

struct Hash128 {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  friend bool operator==(const Hash128&, const Hash128&) = default;
};

// MurmurHash3 x64/128. Stable across platforms and processes.
Hash128 murmur3_128(std::string_view bytes, std::uint64_t seed = 0);

inline std::uint64_t hash64(std::string_view bytes, std::uint64_t seed = 0) {
  return murmur3_128(bytes, seed).lo;
}

// 64-bit finalizer (splitmix64). A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string to_hex(const Hash128& h);
std::string to_hex(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view hex);

}  // namespace corpuskit
