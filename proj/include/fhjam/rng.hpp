#pragma once

// Counter-derived random streams.
//
// Every random draw in a simulation is addressed by a path of integers from
// a root seed: (seed) -> (cell) -> (trial) -> (column). A StreamKey names one
// node of that tree; child(i) derives the i-th child deterministically. The
// numbers a worker sees therefore depend only on which trial/column it is
// computing, never on how work was split across threads.

#include <cstdint>
#include <limits>

namespace fhjam {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class StreamKey {
public:
    constexpr explicit StreamKey(std::uint64_t seed = 0) noexcept : value_(splitmix64(seed)) {}

    constexpr StreamKey child(std::uint64_t index) const noexcept {
        StreamKey k;
        k.value_ = splitmix64(value_ ^ splitmix64(index + 0x632be59bd9b4e019ULL));
        return k;
    }

    constexpr std::uint64_t value() const noexcept { return value_; }

    friend constexpr bool operator==(StreamKey, StreamKey) = default;

private:
    std::uint64_t value_;
};

/// SplitMix64 sequence seeded from a key. Satisfies UniformRandomBitGenerator
/// so it plugs into the <random> distributions.
class Stream {
public:
    using result_type = std::uint64_t;

    constexpr explicit Stream(StreamKey key) noexcept : state_(key.value()) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::uint64_t state_;
};

} // namespace fhjam
