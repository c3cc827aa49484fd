#pragma once

#include <array>
#include <cstdint>

namespace forestfire {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A pure function of (key, counter): every draw in the project is addressed
/// by its coordinates rather than by a position in a sequential stream, so
/// lazily extending a site or a cell never depends on query order.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Block apply(Block ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Block single_round(const Block& c, const Key& k) noexcept
    {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Stream tags keep the sub-streams of different consumers disjoint.
enum class StreamTag : std::uint64_t {
    site_arrivals = 1,
    site_rates = 2,
    continuous_cells = 3,
    replications = 4,
    test_sequences = 5,
};

/// A keyed family of draws: (master seed, tag, stream id, draw index) -> 128 bits.
class CounterStream {
public:
    constexpr CounterStream(std::uint64_t seed, StreamTag tag, std::uint64_t stream_id) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_((static_cast<std::uint64_t>(tag) << 56) ^ (stream_id & kStreamMask))
    {
    }

    constexpr Philox4x32::Block block(std::uint64_t index) const noexcept
    {
        return Philox4x32::apply({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                 key_);
    }

    constexpr std::uint64_t bits(std::uint64_t index) const noexcept
    {
        const auto b = block(index);
        return (std::uint64_t{b[1]} << 32) | b[0];
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    constexpr double uniform(std::uint64_t index) const noexcept { return to_open_unit(bits(index)); }

    /// Two independent open-interval uniforms from one block.
    constexpr std::array<double, 2> uniform_pair(std::uint64_t index) const noexcept
    {
        const auto b = block(index);
        return {to_open_unit((std::uint64_t{b[1]} << 32) | b[0]), to_open_unit((std::uint64_t{b[3]} << 32) | b[2])};
    }

    static constexpr double to_open_unit(std::uint64_t x) noexcept
    {
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    static constexpr std::uint64_t kStreamMask = (std::uint64_t{1} << 56) - 1;

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
};

/// Seed of replication `index` under `master_seed`.
constexpr std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) noexcept
{
    return CounterStream(master_seed, StreamTag::replications, 0).bits(index);
}

} // namespace forestfire
