#include "fedsim/autotune/hook.hpp"

#include "fedsim/errors.hpp"

namespace fedsim::autotune
{
    HookAssignment per_client_config_hook(std::span<const learnkit::TrainerConfig> candidates,
                                          std::span<const ParticipantId> clients, const HookFeedback &feedback,
                                          simnet::SeededRng &rng)
    {
        if (candidates.empty())
        {
            throw ValidationError("per-client configuration hook needs at least one candidate");
        }
        HookAssignment out;
        out.round = feedback.round;
        for (auto c : clients)
        {
            out.choice[c] = rng.index(candidates.size());
        }
        return out;
    }
} // namespace fedsim::autotune
