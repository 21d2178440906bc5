#pragma once

#include "fedsim/fedcore/strategy.hpp"
#include "fedsim/learnkit/param_vector.hpp"
#include "fedsim/msgflow/payload.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace fedsim::fedcore
{
    inline constexpr int kMaxRestarts = 3;

    struct Update
    {
        ParticipantId client = 0;
        learnkit::ParamVector delta;
        double num_samples = 1.0;
        // Version the client trained from.
        std::int64_t model_version = 0;
        // Server version minus model_version, set on arrival.
        std::int64_t staleness = 0;
        VirtualTime sent_at = 0.0;
        VirtualTime received_at = 0.0;
    };

    struct ServerState
    {
        std::int64_t version = 0;
        learnkit::ParamVector global_params;
        std::vector<Update> buffer;
        // Training clients and the version they were sent.
        std::map<ParticipantId, std::int64_t> in_flight;
        // Clients whose dispatched version fell more than tau_max behind. They
        // are still busy; their reply is dropped on arrival.
        std::map<ParticipantId, std::int64_t> released;
        VirtualTime round_started_at = 0.0;
        // Expiry of the current round under time_up.
        VirtualTime deadline = 0.0;
        int extensions = 0;
        int restarts = 0;
        std::map<ParticipantId, std::int64_t> agg_count;
    };

    enum class Decision
    {
        No,
        Yes,
        Remedial,
    };

    const char *to_string(Decision d) noexcept;

    // Sample `count` idle clients and send them the current model.
    struct SendToIdle
    {
        std::size_t count = 1;
    };
    // Push the round deadline out to `deadline`.
    struct ExtendBudget
    {
        VirtualTime deadline = 0.0;
    };
    // Aggregate whatever is buffered.
    struct AggregateNow
    {
    };
    // Release every in-flight client and sample a fresh cohort.
    struct RestartRound
    {
    };

    using Action = std::variant<SendToIdle, ExtendBudget, AggregateNow, RestartRound>;

    std::string describe(const Action &a);

    enum class UpdateFate
    {
        Buffered,
        // Staleness above tau_max.
        DroppedStale,
        // The client had been released before it answered.
        DroppedReleased,
    };

    const char *to_string(UpdateFate f) noexcept;

    struct UpdateOutcome
    {
        UpdateFate fate = UpdateFate::Buffered;
        std::int64_t staleness = 0;
        // Follow-up broadcasts, to be executed after the trigger check.
        std::vector<Action> actions;
        Decision decision = Decision::No;
    };

    // Records an arriving update. Staleness is measured against the current
    // version; updates beyond tau_max are dropped. Under after-receiving
    // broadcasts every reply from an in-flight client frees one slot, which
    // is returned as SendToIdle{1}. Throws ProtocolError for a client that is
    // neither in flight nor released.
    UpdateOutcome on_update(ServerState &state, Update upd, const StrategyConfig &strategy, VirtualTime now);

    // all_received: Yes once nothing is in flight and something is buffered.
    // goal_achieved: Yes once the buffer holds the goal; Remedial when the
    // buffer plus in-flight clients can no longer reach it.
    // time_up: evaluated only once now >= deadline; Yes with at least
    // min_feedback buffered updates, Remedial otherwise.
    // An empty buffer with nothing in flight is Remedial for every trigger.
    Decision should_aggregate(const StrategyConfig &strategy, const ServerState &state, VirtualTime now);

    // Default remedial policy. time_up: extend the budget once, then
    // aggregate a non-empty buffer or restart the round. goal_achieved: top
    // the in-flight set back up. Restarts beyond kMaxRestarts throw
    // CourseStalled.
    std::vector<Action> remedial_action(const StrategyConfig &strategy, const ServerState &state, VirtualTime now);

    enum class AggregatorKind
    {
        FedAvg,
        Krum,
    };

    struct AggregatorConfig
    {
        AggregatorKind kind = AggregatorKind::FedAvg;
        std::size_t krum_f = 0;
        // Weight updates by sample count; otherwise by the staleness discount alone.
        bool weighted = true;
        // Groups exchanged with clients; empty means all.
        std::set<std::string> share_list;
    };

    struct AggregationResult
    {
        std::int64_t new_version = 0;
        std::vector<ParticipantId> contributors;
        std::vector<std::int64_t> staleness;
        std::vector<double> weights;
        // Buffered updates the rule discarded (Krum losers).
        std::vector<ParticipantId> rejected;
        // In-flight clients released because their version fell behind.
        std::vector<ParticipantId> released;
    };

    // Folds the buffer into the global model, bumps the version, clears the
    // buffer, resets the round clock and releases in-flight clients whose
    // version is now more than tau_max behind. Throws EmptyAggregation.
    AggregationResult aggregate(ServerState &state, const StrategyConfig &strategy, const AggregatorConfig &agg,
                                VirtualTime now);

    // Releases every in-flight client and restarts the round clock. Returns
    // the released clients.
    std::vector<ParticipantId> restart_round(ServerState &state, const StrategyConfig &strategy, VirtualTime now);

    msgflow::Payload to_payload(const Update &u);
    Update update_from_payload(const msgflow::Payload &p);
    msgflow::Payload to_payload(const ServerState &s);
    ServerState server_state_from_payload(const msgflow::Payload &p);

    // Helpers for (client -> integer) maps inside checkpoints.
    msgflow::Payload to_payload(const std::map<ParticipantId, std::int64_t> &m);
    std::map<ParticipantId, std::int64_t> id_map_from_payload(const msgflow::Payload &p);
} // namespace fedsim::fedcore
