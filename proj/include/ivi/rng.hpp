#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ivi::rng {

// Philox4x32-10 counter-based generator. A block is a pure function of
// (counter, key), so any (path, step, slot) address can be generated on any
// worker and the result is identical regardless of scheduling.
struct Philox4x32 {
  static constexpr std::uint32_t M0 = 0xD2511F53u;
  static constexpr std::uint32_t M1 = 0xCD9E8D57u;
  static constexpr std::uint32_t W0 = 0x9E3779B9u;
  static constexpr std::uint32_t W1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round != 0) {
        key[0] += W0;
        key[1] += W1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

inline double u64_to_uniform(std::uint64_t u) {
  // (0, 1) exclusive: 52 bits offset by half an ulp. With 53 bits the offset
  // is not representable near 1 and the top draw rounds to exactly 1.0; every
  // value of this map is exact, range [2^-53, 1 - 2^-53].
  return (static_cast<double>(u >> 12) + 0.5) * 0x1.0p-52;
}

// Per-path substream addressed by (seed; path, step, slot). Each address maps
// to one Philox block; the two 64-bit lanes of the block provide the uniforms
// behind one normal or one uniform variate. Slots keep the IG draw and the
// price draw independent. The antithetic flip negates normals and reflects
// uniforms, reusing the mate's counter path.
struct PathStream {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  bool flip = false;

  enum Slot : std::uint32_t { IgNormal = 0, IgUniform = 1, PriceNormal = 2 };

  std::array<std::uint64_t, 2> lanes(std::uint32_t step, std::uint32_t slot) const {
    const auto b = Philox4x32::block(
        {static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), step, slot},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    return {(static_cast<std::uint64_t>(b[0]) << 32) | b[1],
            (static_cast<std::uint64_t>(b[2]) << 32) | b[3]};
  }

  double normal(std::uint32_t step, std::uint32_t slot) const {
    const auto l = lanes(step, slot);
    const double u1 = u64_to_uniform(l[0]);
    const double u2 = u64_to_uniform(l[1]);
    const double x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return flip ? -x : x;
  }

  double uniform(std::uint32_t step, std::uint32_t slot) const {
    const double u = u64_to_uniform(lanes(step, slot)[0]);
    return flip ? 1.0 - u : u;
  }
};

}  // namespace ivi::rng
