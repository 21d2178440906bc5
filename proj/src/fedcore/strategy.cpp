#include "fedsim/fedcore/strategy.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/util/overloaded.hpp"

#include <cmath>

namespace fedsim::fedcore
{
    double StalenessPolicy::weight(std::int64_t tau) const noexcept
    {
        if (tau < 0 || tau > tau_max)
        {
            return 0.0;
        }
        switch (discount)
        {
        case Discount::Inverse:
            return 1.0 / (1.0 + static_cast<double>(tau));
        case Discount::None:
            return 1.0;
        }
        return 0.0;
    }

    std::size_t StrategyConfig::target_in_flight() const noexcept
    {
        return concurrency + static_cast<std::size_t>(std::ceil(over_selection_extra * static_cast<double>(concurrency)));
    }

    std::string StrategyConfig::name() const
    {
        const bool sync_family = manner == Manner::AfterAggregating && staleness.tau_max == 0 &&
                                 std::holds_alternative<UniformSampler>(sampler);
        if (sync_family && std::holds_alternative<AllReceived>(trigger) && over_selection_extra == 0.0)
        {
            return "Sync-vanilla";
        }
        if (sync_family && std::holds_alternative<GoalAchieved>(trigger) && over_selection_extra > 0.0)
        {
            return "Sync-OS";
        }
        std::string n = "Async-";
        n += std::visit(Overloaded{[](const AllReceived &) { return "All"; }, [](const GoalAchieved &) { return "Goal"; },
                                   [](const TimeUp &) { return "Time"; }},
                        trigger);
        n += manner == Manner::AfterAggregating ? "-Aggr" : "-Rece";
        n += std::visit(Overloaded{[](const UniformSampler &) { return "-Unif"; },
                                   [](const ResponsivenessSampler &) { return "-Resp"; },
                                   [](const GroupedSampler &) { return "-Group"; }},
                        sampler);
        return n;
    }

    void validate(const StrategyConfig &s, std::size_t num_clients)
    {
        if (s.concurrency < 1)
        {
            throw ConfigError("strategy.concurrency", "must be at least 1");
        }
        if (!(s.over_selection_extra >= 0.0))
        {
            throw ConfigError("strategy.over_selection_extra", "must be non-negative");
        }
        if (s.target_in_flight() > num_clients)
        {
            throw ConfigError("strategy.concurrency", "concurrency plus over-selection (" + std::to_string(s.target_in_flight()) +
                                                 ") exceeds the " + std::to_string(num_clients) + " clients");
        }
        if (s.staleness.tau_max < 0)
        {
            throw ConfigError("strategy.tau_max", "must be non-negative");
        }
        if (s.over_selection_extra > 0.0 &&
            (s.manner != Manner::AfterAggregating || std::holds_alternative<TimeUp>(s.trigger)))
        {
            throw ConfigError("strategy.over_selection_extra",
                              "over-selection applies only to all_received/goal_achieved with after-aggregating broadcasts");
        }
        std::visit(Overloaded{[&](const AllReceived &) {
                                  if (s.manner == Manner::AfterReceiving)
                                  {
                                      throw ConfigError("strategy.trigger",
                                                        "all_received never fires under after-receiving broadcasts");
                                  }
                              },
                              [&](const GoalAchieved &g) {
                                  if (g.goal < 1 || g.goal > s.target_in_flight())
                                  {
                                      throw ConfigError("strategy.goal", "goal must lie in [1, " +
                                                                             std::to_string(s.target_in_flight()) + "]");
                                  }
                              },
                              [&](const TimeUp &t) {
                                  if (!(t.budget > 0.0))
                                  {
                                      throw ConfigError("strategy.time_budget", "must be positive");
                                  }
                                  if (t.min_feedback < 1)
                                  {
                                      throw ConfigError("strategy.min_feedback", "must be at least 1");
                                  }
                              }},
                   s.trigger);
        if (const auto *g = std::get_if<GroupedSampler>(&s.sampler))
        {
            if (g->num_groups < 1 || g->num_groups > num_clients)
            {
                throw ConfigError("strategy.num_groups", "must lie in [1, num_clients]");
            }
        }
    }

    const char *to_string(Manner m) noexcept
    {
        return m == Manner::AfterAggregating ? "after_aggregating" : "after_receiving";
    }

    const char *to_string(Discount d) noexcept
    {
        return d == Discount::Inverse ? "inverse" : "none";
    }

    std::string trigger_name(const Trigger &t)
    {
        return std::visit(Overloaded{[](const AllReceived &) { return std::string("all_received"); },
                                     [](const GoalAchieved &) { return std::string("goal_achieved"); },
                                     [](const TimeUp &) { return std::string("time_up"); }},
                          t);
    }

    std::string sampler_name(const SamplerKind &s)
    {
        return std::visit(Overloaded{[](const UniformSampler &) { return std::string("uniform"); },
                                     [](const ResponsivenessSampler &) { return std::string("responsiveness"); },
                                     [](const GroupedSampler &) { return std::string("grouped"); }},
                          s);
    }
} // namespace fedsim::fedcore
