#pragma once

#include "fedsim/msgflow/message.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

namespace fedsim::fedcore
{
    // Aggregate once every in-flight client has answered.
    struct AllReceived
    {
    };

    // Aggregate once `goal` updates are buffered.
    struct GoalAchieved
    {
        std::size_t goal = 1;
    };

    // Aggregate when `budget` has elapsed since the round started, provided at
    // least `min_feedback` updates are buffered; otherwise go remedial.
    struct TimeUp
    {
        VirtualTime budget = 1.0;
        std::size_t min_feedback = 1;
    };

    using Trigger = std::variant<AllReceived, GoalAchieved, TimeUp>;

    enum class Manner
    {
        AfterAggregating,
        AfterReceiving,
    };

    struct UniformSampler
    {
    };
    struct ResponsivenessSampler
    {
    };
    struct GroupedSampler
    {
        std::size_t num_groups = 1;
    };

    using SamplerKind = std::variant<UniformSampler, ResponsivenessSampler, GroupedSampler>;

    enum class Discount
    {
        // 1 / (1 + tau)
        Inverse,
        // Constant 1.
        None,
    };

    struct StalenessPolicy
    {
        std::int64_t tau_max = 0;
        Discount discount = Discount::Inverse;

        // discount(tau) for tau <= tau_max, 0 beyond.
        double weight(std::int64_t tau) const noexcept;
    };

    struct StrategyConfig
    {
        Trigger trigger = AllReceived{};
        Manner manner = Manner::AfterAggregating;
        SamplerKind sampler = UniformSampler{};
        StalenessPolicy staleness;
        std::size_t concurrency = 1;
        double over_selection_extra = 0.0;

        // Clients kept in flight: concurrency plus ceil(extra * concurrency).
        std::size_t target_in_flight() const noexcept;

        // "Sync-vanilla", "Sync-OS" or "Async-<Goal|Time|All>-<Aggr|Rece>-<Unif|Resp|Group>".
        std::string name() const;
    };

    // Throws ValidationError (or ConfigError with the strategy key) when the
    // combination is inconsistent, e.g. a goal above the in-flight target or
    // all_received combined with after-receiving broadcasts.
    void validate(const StrategyConfig &s, std::size_t num_clients);

    const char *to_string(Manner m) noexcept;
    const char *to_string(Discount d) noexcept;
    std::string trigger_name(const Trigger &t);
    std::string sampler_name(const SamplerKind &s);
} // namespace fedsim::fedcore
