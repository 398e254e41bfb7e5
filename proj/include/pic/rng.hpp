#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pic {

// Counter-based random numbers (Philox 4x32, 10 rounds).
//
// Every draw is addressed by (seed, sample_index, step, block) instead of by
// mutable generator state.  A rollout can therefore be regenerated bit for
// bit in isolation, and a batch can be filled in any order or split across
// any number of workers without changing a single draw.
namespace philox {

inline constexpr std::uint32_t kWeylA = 0x9E3779B9u;
inline constexpr std::uint32_t kWeylB = 0xBB67AE85u;
inline constexpr std::uint32_t kMultA = 0xD2511F53u;
inline constexpr std::uint32_t kMultB = 0xCD9E8D57u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0, std::uint32_t k1)
{
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMultA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMultB) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

// One 128-bit block.  Counter layout: [block | step | sample_lo | sample_hi],
// key = seed.
inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t sample,
                                          std::uint32_t step, std::uint32_t blk)
{
    std::array<std::uint32_t, 4> ctr = {
        blk,
        step,
        static_cast<std::uint32_t>(sample),
        static_cast<std::uint32_t>(sample >> 32),
    };
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k0 += kWeylA;
            k1 += kWeylB;
        }
        round_once(ctr, k0, k1);
    }
    return ctr;
}

}  // namespace philox

// Maps two 32-bit words to a double in (0, 1].  The +1 keeps log() finite.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

// Two independent standard normals from one counter block (Box-Muller).
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t sample,
                                         std::uint32_t step, std::uint32_t blk)
{
    const auto w = philox::block(seed, sample, step, blk);
    const double u1 = uniform_open(w[0], w[1]);
    const double u2 = uniform_open(w[2], w[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// Fills out[0..m) with standard normals for one (seed, sample, step) address.
inline void fill_normals(std::uint64_t seed, std::uint64_t sample, std::uint32_t step,
                         double* out, int m)
{
    for (int j = 0; j < m; j += 2) {
        const auto z = normal_pair(seed, sample, step, static_cast<std::uint32_t>(j / 2));
        out[j] = z[0];
        if (j + 1 < m) out[j + 1] = z[1];
    }
}

// Stable sub-stream derivation, e.g. one seed per closed-loop step.  The tag
// separates streams that share (seed, k), such as rollouts vs actuation noise.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k, std::uint32_t tag)
{
    const auto w = philox::block(seed, k, tag, 0x5EEDu);
    return (static_cast<std::uint64_t>(w[0]) << 32) | w[2];
}

}  // namespace pic
