#pragma once

#include <array>
#include <cstdint>

namespace treestop {

/// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Independent draw families. The tag occupies the top byte of the last counter word.
enum class Stream : std::uint8_t { GbmShock = 1, Uniform1d = 2, FoldShuffle = 3, AssetSelect = 4, Test = 5 };

/// One Philox block for (seed, stream, a, b, c); c must be below 2^24.
/// Counter = (lo32(a), hi32(a), b, stream << 24 | c), key = (lo32(seed), hi32(seed)).
std::array<std::uint32_t, 4> random_block(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint32_t b,
                                          std::uint32_t c);

/// 53-bit uniform on [0, 1) built from two 32-bit words.
double to_uniform(std::uint32_t hi, std::uint32_t lo);

/// Standard normal by inverse CDF of the open-interval uniform (k + 0.5) / 2^53.
double to_normal(std::uint32_t hi, std::uint32_t lo);

inline double uniform01(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint32_t b, std::uint32_t c = 0) {
  const auto w = random_block(seed, stream, a, b, c);
  return to_uniform(w[0], w[1]);
}

/// Integer in [0, bound) by 64x64 multiply-high of the block's first two words.
std::uint64_t uniform_index(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t bound);

}  // namespace treestop
