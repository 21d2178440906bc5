#include "fedsim/simnet/rng.hpp"

namespace fedsim::simnet
{
    std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t derive_stream_seed(std::uint64_t seed, const StreamId &id) noexcept
    {
        std::uint64_t h = splitmix64(seed);
        h = splitmix64(h ^ static_cast<std::uint64_t>(id.purpose));
        h = splitmix64(h ^ static_cast<std::uint64_t>(id.owner));
        h = splitmix64(h ^ static_cast<std::uint64_t>(id.index));
        return h;
    }
} // namespace fedsim::simnet
