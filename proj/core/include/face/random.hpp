#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace face {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The 64-bit
// seed is the key; the 64-bit stream id fills the upper half of the counter,
// so (seed, stream) pairs give independent, reproducible sequences regardless
// of how work is scheduled across threads.
class Philox4x32 {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    // Raw 10-round bijection; exposed for known-answer tests.
    static Block bijection(Block counter, Key key);

private:
    Key key_{};
    Block counter_{};
    Block buffer_{};
    int used_ = 4;
};

// Uniform, normal and bounded-integer draws on top of a 64-bit engine, with
// fixed formulas so results do not depend on the standard library.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0, std::uint64_t stream = 0) : engine_(seed, stream) {}

    double uniform();                 // [0, 1)
    double normal();                  // standard normal, Box-Muller
    int uniform_int(int lo, int hi);  // inclusive, unbiased

private:
    Philox4x32 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace face
