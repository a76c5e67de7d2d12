#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace binscreen {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Output is a pure function of (key, counter), so any substream can be
/// regenerated without replaying earlier ones. Each block yields two
/// 64-bit words.
class Philox {
public:
    using result_type = std::uint64_t;

    explicit Philox(std::uint64_t key = 0, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate.
    double normal() { return normal_(*this); }

    /// One raw 4x32 block for the given key/counter; exposed for tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key) noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    std::normal_distribution<double> normal_;
};

/// SplitMix64 finaliser; used to mix seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of replicate `replicate` of experiment `experiment`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t experiment, std::uint64_t replicate) noexcept;

}  // namespace binscreen
