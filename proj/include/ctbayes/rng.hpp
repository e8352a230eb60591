#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace ctbayes {

// Seed derivation shared by every component. A stream is identified by the
// experiment seed plus a list of integer tags (epoch, step, slice index...),
// so no generator state ever has to be carried between call sites.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_tag(std::string_view tag) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> tags) {
  uint64_t s = splitmix64(seed);
  for (uint64_t t : tags) s = splitmix64(s ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
  return s;
}

}  // namespace ctbayes
