#pragma once

#include <cstdint>
#include <random>

namespace fedsim::simnet
{
    // Every stochastic decision draws from its own substream, keyed by what it
    // is for, who it belongs to and a per-owner counter. Because streams are
    // derived rather than advanced, the whole RNG state of a run is the seed
    // plus the counters it already keeps.
    enum class Purpose : std::uint32_t
    {
        Data = 1,
        Partition = 2,
        Latency = 3,
        CompTime = 4,
        CommUp = 5,
        CommDown = 6,
        Sampling = 7,
        Batches = 8,
        DpNoise = 9,
        ConfigHook = 10,
        ModelInit = 11,
        NoisyClients = 12,
        Search = 13,
        Test = 99,
    };

    struct StreamId
    {
        Purpose purpose = Purpose::Test;
        std::int64_t owner = 0;
        std::int64_t index = 0;
    };

    std::uint64_t splitmix64(std::uint64_t x) noexcept;
    std::uint64_t derive_stream_seed(std::uint64_t seed, const StreamId &id) noexcept;

    class SeededRng
    {
    public:
        using Engine = std::mt19937_64;

        SeededRng(std::uint64_t seed, StreamId id) : m_engine(derive_stream_seed(seed, id)) {}

        Engine &engine() noexcept { return m_engine; }

        double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(m_engine); }
        double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(m_engine); }
        double normal(double mean = 0.0, double stddev = 1.0)
        {
            return std::normal_distribution<double>(mean, stddev)(m_engine);
        }
        // Uniform integer in [0, n).
        std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(m_engine); }

    private:
        Engine m_engine;
    };
} // namespace fedsim::simnet
