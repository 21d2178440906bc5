#include "fedsim/fedcore/server.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/learnkit/aggregator.hpp"
#include "fedsim/util/overloaded.hpp"

#include <algorithm>
#include <string>

namespace fedsim::fedcore
{
    const char *to_string(Decision d) noexcept
    {
        switch (d)
        {
        case Decision::No:
            return "no";
        case Decision::Yes:
            return "yes";
        case Decision::Remedial:
            return "remedial";
        }
        return "?";
    }

    const char *to_string(UpdateFate f) noexcept
    {
        switch (f)
        {
        case UpdateFate::Buffered:
            return "buffered";
        case UpdateFate::DroppedStale:
            return "stale";
        case UpdateFate::DroppedReleased:
            return "released";
        }
        return "?";
    }

    std::string describe(const Action &a)
    {
        return std::visit(
            Overloaded{[](const SendToIdle &s) { return "send_to_idle(" + std::to_string(s.count) + ")"; },
                       [](const ExtendBudget &e) { return "extend_budget(" + std::to_string(e.deadline) + ")"; },
                       [](const AggregateNow &) { return std::string("aggregate_now"); },
                       [](const RestartRound &) { return std::string("restart_round"); }},
            a);
    }

    UpdateOutcome on_update(ServerState &state, Update upd, const StrategyConfig &strategy, VirtualTime now)
    {
        UpdateOutcome out;
        if (auto it = state.released.find(upd.client); it != state.released.end())
        {
            out.fate = UpdateFate::DroppedReleased;
            out.staleness = state.version - it->second;
            state.released.erase(it);
            out.decision = should_aggregate(strategy, state, now);
            return out;
        }
        auto it = state.in_flight.find(upd.client);
        if (it == state.in_flight.end())
        {
            throw ProtocolError("update from client " + std::to_string(upd.client) + " which is not training");
        }
        upd.model_version = it->second;
        state.in_flight.erase(it);
        upd.staleness = state.version - upd.model_version;
        out.staleness = upd.staleness;
        if (upd.staleness > strategy.staleness.tau_max)
        {
            out.fate = UpdateFate::DroppedStale;
        }
        else
        {
            out.fate = UpdateFate::Buffered;
            state.buffer.push_back(std::move(upd));
        }
        if (strategy.manner == Manner::AfterReceiving)
        {
            out.actions.push_back(SendToIdle{1});
        }
        out.decision = should_aggregate(strategy, state, now);
        return out;
    }

    Decision should_aggregate(const StrategyConfig &strategy, const ServerState &state, VirtualTime now)
    {
        const std::size_t buffered = state.buffer.size();
        const std::size_t flying = state.in_flight.size();
        return std::visit(Overloaded{[&](const AllReceived &) {
                                         if (flying > 0)
                                         {
                                             return Decision::No;
                                         }
                                         return buffered > 0 ? Decision::Yes : Decision::Remedial;
                                     },
                                     [&](const GoalAchieved &g) {
                                         if (buffered >= g.goal)
                                         {
                                             return Decision::Yes;
                                         }
                                         return buffered + flying < g.goal ? Decision::Remedial : Decision::No;
                                     },
                                     [&](const TimeUp &t) {
                                         if (now < state.deadline)
                                         {
                                             return Decision::No;
                                         }
                                         return buffered >= t.min_feedback ? Decision::Yes : Decision::Remedial;
                                     }},
                          strategy.trigger);
    }

    std::vector<Action> remedial_action(const StrategyConfig &strategy, const ServerState &state, VirtualTime now)
    {
        auto restart = [&]() -> std::vector<Action> {
            if (state.restarts >= kMaxRestarts)
            {
                throw CourseStalled("round " + std::to_string(state.version) + " restarted " +
                                    std::to_string(state.restarts) + " times without any usable update (t=" +
                                    std::to_string(now) + ")");
            }
            return {RestartRound{}};
        };
        if (const auto *t = std::get_if<TimeUp>(&strategy.trigger))
        {
            if (state.extensions == 0)
            {
                return {ExtendBudget{state.deadline + t->budget}};
            }
            if (!state.buffer.empty())
            {
                return {AggregateNow{}};
            }
            return restart();
        }
        if (state.in_flight.empty() && state.buffer.empty() && state.released.empty() &&
            std::holds_alternative<AllReceived>(strategy.trigger))
        {
            return restart();
        }
        const std::size_t target = strategy.target_in_flight();
        if (state.in_flight.size() < target)
        {
            return {SendToIdle{target - state.in_flight.size()}};
        }
        return {};
    }

    AggregationResult aggregate(ServerState &state, const StrategyConfig &strategy, const AggregatorConfig &agg,
                                VirtualTime now)
    {
        if (state.buffer.empty())
        {
            throw EmptyAggregation();
        }
        const learnkit::ParamVector base = agg.share_list.empty()
                                               ? state.global_params
                                               : learnkit::filter_shared(state.global_params, agg.share_list);
        AggregationResult result;
        learnkit::ParamVector next;
        if (agg.kind == AggregatorKind::Krum)
        {
            std::vector<learnkit::ParamVector> deltas;
            deltas.reserve(state.buffer.size());
            for (const auto &u : state.buffer)
            {
                deltas.push_back(u.delta);
            }
            const auto choice = learnkit::krum_select(deltas, agg.krum_f);
            next = base + deltas[choice.index];
            for (std::size_t i = 0; i < state.buffer.size(); ++i)
            {
                const auto &u = state.buffer[i];
                if (i == choice.index)
                {
                    result.contributors.push_back(u.client);
                    result.staleness.push_back(u.staleness);
                    result.weights.push_back(1.0);
                }
                else
                {
                    result.rejected.push_back(u.client);
                }
            }
        }
        else
        {
            std::vector<learnkit::WeightedDelta> weighted;
            weighted.reserve(state.buffer.size());
            for (const auto &u : state.buffer)
            {
                const double w = strategy.staleness.weight(u.staleness);
                weighted.push_back({u.delta, agg.weighted ? u.num_samples : 1.0, w});
                result.contributors.push_back(u.client);
                result.staleness.push_back(u.staleness);
                result.weights.push_back(weighted.back().weight());
            }
            next = learnkit::fedavg_aggregate(weighted, base);
        }
        state.global_params =
            agg.share_list.empty() ? std::move(next) : learnkit::merge_shared(state.global_params, next);
        for (auto c : result.contributors)
        {
            ++state.agg_count[c];
        }
        state.buffer.clear();
        ++state.version;
        result.new_version = state.version;
        state.round_started_at = now;
        state.extensions = 0;
        state.restarts = 0;
        if (const auto *t = std::get_if<TimeUp>(&strategy.trigger))
        {
            state.deadline = now + t->budget;
        }
        for (auto it = state.in_flight.begin(); it != state.in_flight.end();)
        {
            if (it->second < state.version - strategy.staleness.tau_max)
            {
                result.released.push_back(it->first);
                state.released.emplace(it->first, it->second);
                it = state.in_flight.erase(it);
            }
            else
            {
                ++it;
            }
        }
        return result;
    }

    std::vector<ParticipantId> restart_round(ServerState &state, const StrategyConfig &strategy, VirtualTime now)
    {
        std::vector<ParticipantId> released;
        for (const auto &[client, version] : state.in_flight)
        {
            released.push_back(client);
            state.released.emplace(client, version);
        }
        state.in_flight.clear();
        ++state.restarts;
        state.extensions = 0;
        state.round_started_at = now;
        if (const auto *t = std::get_if<TimeUp>(&strategy.trigger))
        {
            state.deadline = now + t->budget;
        }
        return released;
    }

    msgflow::Payload to_payload(const std::map<ParticipantId, std::int64_t> &m)
    {
        msgflow::Payload p;
        for (const auto &[k, v] : m)
        {
            p.set(std::to_string(k), v);
        }
        return p;
    }

    std::map<ParticipantId, std::int64_t> id_map_from_payload(const msgflow::Payload &p)
    {
        std::map<ParticipantId, std::int64_t> m;
        for (const auto &e : p.entries())
        {
            m.emplace(std::stoll(e.name), p.integer(e.name));
        }
        return m;
    }

    msgflow::Payload to_payload(const Update &u)
    {
        msgflow::Payload p;
        p.set("client", u.client)
            .set("num_samples", u.num_samples)
            .set("model_version", u.model_version)
            .set("staleness", u.staleness)
            .set("sent_at", u.sent_at)
            .set("received_at", u.received_at)
            .set("delta", learnkit::to_payload(u.delta));
        return p;
    }

    Update update_from_payload(const msgflow::Payload &p)
    {
        Update u;
        u.client = p.integer("client");
        u.num_samples = p.real("num_samples");
        u.model_version = p.integer("model_version");
        u.staleness = p.integer("staleness");
        u.sent_at = p.real("sent_at");
        u.received_at = p.real("received_at");
        u.delta = learnkit::params_from_payload(p.nested("delta"));
        return u;
    }

    msgflow::Payload to_payload(const ServerState &s)
    {
        msgflow::Payload buffer;
        for (std::size_t i = 0; i < s.buffer.size(); ++i)
        {
            buffer.set(std::to_string(i), to_payload(s.buffer[i]));
        }
        msgflow::Payload p;
        p.set("version", s.version)
            .set("global_params", learnkit::to_payload(s.global_params))
            .set("buffer", std::move(buffer))
            .set("in_flight", to_payload(s.in_flight))
            .set("released", to_payload(s.released))
            .set("round_started_at", s.round_started_at)
            .set("deadline", s.deadline)
            .set("extensions", s.extensions)
            .set("restarts", s.restarts)
            .set("agg_count", to_payload(s.agg_count));
        return p;
    }

    ServerState server_state_from_payload(const msgflow::Payload &p)
    {
        ServerState s;
        s.version = p.integer("version");
        s.global_params = learnkit::params_from_payload(p.nested("global_params"));
        for (const auto &e : p.nested("buffer").entries())
        {
            s.buffer.push_back(update_from_payload(p.nested("buffer").nested(e.name)));
        }
        s.in_flight = id_map_from_payload(p.nested("in_flight"));
        s.released = id_map_from_payload(p.nested("released"));
        s.round_started_at = p.real("round_started_at");
        s.deadline = p.real("deadline");
        s.extensions = static_cast<int>(p.integer("extensions"));
        s.restarts = static_cast<int>(p.integer("restarts"));
        s.agg_count = id_map_from_payload(p.nested("agg_count"));
        return s;
    }
} // namespace fedsim::fedcore
