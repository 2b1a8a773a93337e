#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tentshadow {

/// Philox4x64-10 counter-based generator (Salmon et al., SC'11). The key is
/// (seed, stream), so each trial or realization owns an independent stream
/// that does not depend on scheduling. Satisfies UniformRandomBitGenerator.
class Philox {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint64_t, 4>;

    Philox(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == 4) {
            buffer_ = block(counter_, key_);
            increment();
            pos_ = 0;
        }
        return buffer_[pos_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// One application of the keyed bijection.
    static Block block(Block ctr, std::array<std::uint64_t, 2> key) {
        constexpr std::uint64_t m0 = 0xD2E7470EE14C6C93ULL;
        constexpr std::uint64_t m1 = 0xCA5A826395121157ULL;
        constexpr std::uint64_t w0 = 0x9E3779B97F4A7C15ULL;
        constexpr std::uint64_t w1 = 0xBB67AE8584CAA73BULL;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += w0;
                key[1] += w1;
            }
            unsigned __int128 p0 = static_cast<unsigned __int128>(m0) * ctr[0];
            unsigned __int128 p1 = static_cast<unsigned __int128>(m1) * ctr[2];
            auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
            auto lo0 = static_cast<std::uint64_t>(p0);
            auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
            auto lo1 = static_cast<std::uint64_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    void increment() {
        for (auto& word : counter_)
            if (++word != 0) break;
    }

    std::array<std::uint64_t, 2> key_;
    Block counter_{0, 0, 0, 0};
    Block buffer_{};
    int pos_ = 4;
};

} // namespace tentshadow
