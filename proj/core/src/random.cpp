#include "krmap/random.hpp"

#include <array>

namespace krmap {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(splitmix64(seed) ^ splitmix64(h) ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  const std::uint64_t s = derive_seed(seed, stream, index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

double uniform_open(Rng& rng) {
  // 53 random bits mapped to (0, 1).
  const std::uint64_t bits = rng() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace krmap
