#include "qlw/rng.hpp"

namespace qlw {
namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMulA, ctr[0], hi0, lo0);
        mulhilo(kMulB, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Philox::Philox(std::uint64_t seed, std::uint64_t stream_hi, std::uint64_t stream_lo) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {
    // 64 bits of block counter are plenty; the other two counter words carry
    // the stream id, folded to 64 bits.
    const std::uint64_t stream = mix_seed(stream_hi, stream_lo);
    stream_a_ = static_cast<std::uint32_t>(stream);
    stream_b_ = static_cast<std::uint32_t>(stream >> 32);
}

void Philox::refill() noexcept {
    const PhiloxBlock ctr{static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
                          stream_a_, stream_b_};
    buffer_ = philox4x32_10(ctr, key_);
    ++block_index_;
    used_ = 0;
}

Philox::result_type Philox::operator()() noexcept {
    if (used_ > 2) refill();
    const std::uint64_t value = (static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1];
    used_ += 2;
    return value;
}

double Philox::uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Philox::below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift with rejection; exact for every bound.
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            x = (*this)();
            m = static_cast<__uint128_t>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace qlw
