#pragma once

#include "fedsim/learnkit/trainer.hpp"
#include "fedsim/msgflow/message.hpp"
#include "fedsim/simnet/rng.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace fedsim::autotune
{
    // Per-client results of a round; unused by the uniform policy but kept
    // in the hook signature so a learning policy can consume it.
    struct HookFeedback
    {
        std::int64_t round = 0;
        std::map<ParticipantId, double> val_loss;
    };

    struct HookAssignment
    {
        std::int64_t round = 0;
        // client -> candidate index
        std::map<ParticipantId, std::size_t> choice;
    };

    // Draws one candidate uniformly for every client, independently. Throws
    // ValidationError when there are no candidates.
    HookAssignment per_client_config_hook(std::span<const learnkit::TrainerConfig> candidates,
                                          std::span<const ParticipantId> clients, const HookFeedback &feedback,
                                          simnet::SeededRng &rng);
} // namespace fedsim::autotune
