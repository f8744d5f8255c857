#pragma once

// Counter-based random streams.
//
// The generator is Philox4x32-10 (Salmon et al., SC'11): a keyed bijection on
// 128-bit counters. A stream is identified by a 64-bit key; the i-th block of a
// stream is philox(counter = i, key). Ensemble member k of a run with master seed
// s uses the stream keyed by s ^ k. Uniforms take the top 52 bits of a 64-bit
// word and are shifted by half an ulp so they lie strictly inside (0,1); normal
// variates are produced by inversion, z = -sqrt(2) * erfc^{-1}(2u).

#include <array>
#include <cmath>
#include <cstdint>

#include <boost/math/special_functions/erf.hpp>

namespace dimlab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key)
{
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

/// Maps a 64-bit word to a double strictly inside (0,1).
inline double to_open_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Standard normal quantile.
inline double normal_quantile(double u)
{
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

/// Sequential reader over one Philox stream. Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t key, std::uint64_t first_block = 0)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}, block_(first_block)
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()()
    {
        if (lane_ == 2) refill();
        return buffer_[lane_++];
    }

    double uniform() { return to_open_unit((*this)()); }
    double normal() { return normal_quantile(uniform()); }
    bool bernoulli(double p) { return uniform() < p; }

private:
    void refill()
    {
        const auto out = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                        0u, 0u},
                                       key_);
        buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        ++block_;
        lane_ = 0;
    }

    PhiloxKey key_;
    std::uint64_t block_;
    std::array<std::uint64_t, 2> buffer_{};
    int lane_ = 2;
};

/// Key of ensemble member k under master seed s.
inline std::uint64_t member_seed(std::uint64_t master, std::uint64_t k) { return master ^ k; }

/// Random access draw: one uniform per (a, b) coordinate pair of a keyed stream.
inline double keyed_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b)
{
    const auto out = philox4x32_10({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
                                   {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
    return to_open_unit((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
}

} // namespace dimlab
