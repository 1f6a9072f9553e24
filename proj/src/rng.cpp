#include "treestop/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include "treestop/error.hpp"

namespace treestop {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

__extension__ typedef unsigned __int128 uint128;

constexpr double kTwoM53 = 1.0 / 9007199254740992.0;

inline std::uint64_t bits53(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi >> 5) << 26) | (lo >> 6);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::array<std::uint32_t, 4> random_block(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint32_t b,
                                          std::uint32_t c) {
  if (c >= (1u << 24)) throw InputError("random stream index out of range");
  const std::array<std::uint32_t, 4> counter{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b,
                                             (static_cast<std::uint32_t>(stream) << 24) | c};
  return philox4x32_10(counter, {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

double to_uniform(std::uint32_t hi, std::uint32_t lo) { return static_cast<double>(bits53(hi, lo)) * kTwoM53; }

double to_normal(std::uint32_t hi, std::uint32_t lo) {
  static const boost::math::normal_distribution<double> standard;
  // k + 0.5 is exact only below 2^52, so the upper half is mirrored onto the lower.
  const std::uint64_t k = bits53(hi, lo);
  constexpr std::uint64_t half = std::uint64_t{1} << 52;
  if (k < half) return boost::math::quantile(standard, (static_cast<double>(k) + 0.5) * kTwoM53);
  const std::uint64_t mirror = (half << 1) - 1 - k;
  return -boost::math::quantile(standard, (static_cast<double>(mirror) + 0.5) * kTwoM53);
}

std::uint64_t uniform_index(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t bound) {
  if (bound == 0) throw InputError("uniform_index needs a positive bound");
  const auto w = random_block(seed, stream, a, 0, 0);
  const std::uint64_t x = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  return static_cast<std::uint64_t>((static_cast<uint128>(x) * bound) >> 64);
}

}  // namespace treestop
