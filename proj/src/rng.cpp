#include "agglom/rng.hpp"

namespace agglom {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = master;
  h = splitmix64(h ^ fnv1a64(stage));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

}  // namespace agglom
