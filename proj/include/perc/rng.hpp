#pragma once

#include <array>
#include <cstdint>

namespace perc {

// Philox-4x32-10 counter-based generator. Counter-based streams make
// every sample reproducible from (seed, stream, counter) alone, which is
// what the run manifests promise: identical config + seed => identical
// output bytes, independent of call interleaving.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

// A named substream of the global generator. Streams with distinct
// (seed, stream) pairs are statistically independent; a stream's output
// depends only on how many values have been drawn from it.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          base_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    std::uint32_t next_u32() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform in [0, 1): 53 random bits over 2^53.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased integer in [0, n) via rejection.
    std::uint32_t below(std::uint32_t n) {
        const std::uint32_t limit = ~0u - (~0u % n);
        for (;;) {
            const std::uint32_t v = next_u32();
            if (v < limit) return v % n;
        }
    }

    bool coin() { return (next_u32() & 1u) != 0; }

    std::uint64_t seed() const {
        return key_[0] | (static_cast<std::uint64_t>(key_[1]) << 32);
    }
    std::uint64_t stream() const {
        return base_[0] | (static_cast<std::uint64_t>(base_[1]) << 32);
    }

  private:
    void refill() {
        buf_ = Philox4x32::block({base_[0], base_[1],
                                  static_cast<std::uint32_t>(counter_),
                                  static_cast<std::uint32_t>(counter_ >> 32)},
                                 key_);
        ++counter_;
        buf_pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> base_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
};

}  // namespace perc
