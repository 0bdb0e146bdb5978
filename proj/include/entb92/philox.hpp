#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each call maps
// a 128-bit counter and a 64-bit key to 128 random bits, so any round of a
// simulation can be regenerated without replaying the rounds before it.

#include <array>
#include <cstdint>

namespace entb92 {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
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

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

/// Uniform doubles for one simulation round, keyed by (seed, round index).
class RoundStream {
public:
    RoundStream(std::uint64_t seed, std::uint64_t round)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          round_lo_(static_cast<std::uint32_t>(round)),
          round_hi_(static_cast<std::uint32_t>(round >> 32)) {}

    /// Next uniform in [0, 1) with 53 random bits.
    double uniform() {
        if (used_ == 4) refill();
        const std::uint64_t bits = (static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1];
        used_ += 2;
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

private:
    void refill() {
        buffer_ = Philox4x32::generate({round_lo_, round_hi_, block_++, 0}, key_);
        used_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t round_lo_;
    std::uint32_t round_hi_;
    std::uint32_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

}  // namespace entb92
