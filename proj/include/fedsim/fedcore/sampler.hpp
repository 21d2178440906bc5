#pragma once

#include "fedsim/fedcore/strategy.hpp"
#include "fedsim/simnet/latency.hpp"
#include "fedsim/simnet/rng.hpp"

#include <set>
#include <vector>

namespace fedsim::fedcore
{
    // Picks clients to train from the idle part of a fixed population.
    class ClientSampler
    {
    public:
        ClientSampler(SamplerKind kind, std::vector<simnet::ClientProfile> population);

        const SamplerKind &kind() const noexcept { return m_kind; }

        // Quantile buckets of speed score, bucket 0 holding the slowest
        // clients. A single bucket for non-grouped samplers.
        const std::vector<std::vector<ParticipantId>> &groups() const noexcept { return m_groups; }

        // k distinct clients from `idle`, returned sorted. Uniform draws without
        // replacement; Responsiveness draws sequentially with probability
        // proportional to speed score; Grouped draws uniformly inside bucket
        // `group % num_groups` and continues into the following buckets when
        // that one runs short. Throws InsufficientClients when k > |idle|.
        std::vector<ParticipantId> sample(const std::set<ParticipantId> &idle, std::size_t k, simnet::SeededRng &rng,
                                          std::size_t group = 0) const;

    private:
        SamplerKind m_kind;
        std::vector<simnet::ClientProfile> m_population;
        std::vector<std::vector<ParticipantId>> m_groups;
    };
} // namespace fedsim::fedcore
