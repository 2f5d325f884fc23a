#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace krmap {

using Rng = std::mt19937_64;

// Deterministic substream seed derived from a master seed, a stream name and an index.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);
Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

// Uniform draw on the open interval (0, 1).
double uniform_open(Rng& rng);

}  // namespace krmap
