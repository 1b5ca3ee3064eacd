#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace entspan {

/// Counter-based generator: Philox4x32-10 (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3").  A (key, counter) pair maps to four 32-bit
/// words; streams derived from (seed, stream index) are independent and
/// reproducible regardless of how many workers consume them.
struct Philox4x32 {
    static constexpr std::string_view name = "philox4x32-10";

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key);
};

/// One logical random stream, addressed by (seed, stream).  The harness uses
/// stream = sample index so that disorder realizations do not depend on
/// worker scheduling.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53 random bits.
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

  private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int avail_ = 0;
};

} // namespace entspan
