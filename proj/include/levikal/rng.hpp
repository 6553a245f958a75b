#pragma once

#include <array>
#include <cstdint>

namespace levikal {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Key = 64-bit seed. Counter words 0-1 hold the block index, words 2-3 the
// stream index, so stream s of seed k is an independent sequence obtained
// without any state sharing: run i of an ensemble uses stream i.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

    static Block encrypt(Block counter, Key key);

    // UniformRandomBitGenerator interface for <random> distributions.
    using result_type = std::uint32_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }
    result_type operator()() { return next_u32(); }

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform();
    // Standard normal via the Box-Muller transform.
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Block buffer_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace levikal
