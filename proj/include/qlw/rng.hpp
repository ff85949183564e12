#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace qlw {

// Philox4x32-10 (Salmon et al., SC'11). Stateless block function of
// (counter, key); streams below are addressed by (seed, stream ids).
using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept;

/// Seeded random stream. Two 64-bit stream coordinates select an independent
/// counter space, so e.g. replication r / good k / grid node j can draw from
/// (seed, r, k) without coordinating with any other stream.
class Philox {
public:
    using result_type = std::uint64_t;

    explicit Philox(std::uint64_t seed, std::uint64_t stream_hi = 0, std::uint64_t stream_lo = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    void refill() noexcept;

    PhiloxKey key_{};
    std::uint32_t stream_a_ = 0;
    std::uint32_t stream_b_ = 0;
    std::uint64_t block_index_ = 0;
    PhiloxBlock buffer_{};
    int used_ = 4;
};

/// splitmix64-style fold of two words into one; used when a stream needs more
/// than two coordinates.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

/// Fisher-Yates shuffle driven by a Philox stream; portable across standard
/// libraries, unlike std::shuffle.
template <typename T>
void shuffle(std::span<T> values, Philox& rng) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace qlw
