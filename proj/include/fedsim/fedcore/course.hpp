#pragma once

#include "fedsim/fedcore/sampler.hpp"
#include "fedsim/fedcore/server.hpp"
#include "fedsim/fedcore/strategy.hpp"
#include "fedsim/learnkit/dataset.hpp"
#include "fedsim/learnkit/model.hpp"
#include "fedsim/learnkit/trainer.hpp"
#include "fedsim/msgflow/codec.hpp"
#include "fedsim/msgflow/flow_graph.hpp"
#include "fedsim/msgflow/registry.hpp"
#include "fedsim/simnet/event_queue.hpp"
#include "fedsim/simnet/latency.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fedsim::fedcore
{
    inline constexpr int kRunLogSchema = 1;

    struct ClientSetup
    {
        simnet::ClientProfile profile;
        // Train and test splits of the client's private data.
        learnkit::Dataset data;
    };

    struct World
    {
        // Client i + 1 is clients[i].
        std::vector<ClientSetup> clients;
        // Held-out global data with validation and test splits.
        learnkit::Dataset eval_data;
        // Clients whose outgoing updates receive Gaussian noise.
        std::set<ParticipantId> noisy_clients;
    };

    // Rebinds one event to a declared handler after the defaults are in place.
    struct HandlerOverride
    {
        msgflow::EventKind event;
        msgflow::HandlerDecl decl;
    };

    struct CourseConfig
    {
        std::uint64_t seed = 0;
        StrategyConfig strategy;
        learnkit::TrainerConfig trainer;
        AggregatorConfig aggregator;
        std::int64_t max_rounds = 10;
        // Evaluations without validation-loss improvement before stopping; 0 disables.
        int patience = 0;
        // Evaluate the global model every `eval_cadence` versions.
        int eval_cadence = 1;
        // Evaluate every client on its own test split at the end.
        bool clientwise_eval = false;
        // Per-client configuration hook: when non-empty every training job
        // draws one candidate uniformly instead of using `trainer`.
        std::vector<learnkit::TrainerConfig> candidates;
        double dp_sigma = 0.0;
        std::vector<HandlerOverride> overrides;
    };

    // Handler ids the engine can execute.
    const std::set<std::string> &builtin_handler_ids();

    // Default bindings for the configured strategy and trainer, followed by
    // the configured overrides. Overwrites are recorded as registry warnings.
    msgflow::HandlerRegistry build_registry(const CourseConfig &config);

    struct RunCounters
    {
        std::int64_t messages = 0;
        std::int64_t received = 0;
        std::int64_t contributed = 0;
        std::int64_t dropped_stale = 0;
        std::int64_t dropped_released = 0;
        std::int64_t rejected = 0;
        std::int64_t after_finish = 0;
        std::int64_t max_simultaneous_sends = 0;
    };

    // Drives one FL course over the virtual-time event queue and writes the
    // JSON-lines run log. Every handler runs through the registry.
    class Course
    {
    public:
        // Throws IncompleteCourse when the handler graph has no path from
        // start to termination, ConfigError for bindings the engine cannot
        // execute, ValidationError for inconsistent settings.
        Course(CourseConfig config, World world, std::ostream *log);
        ~Course();
        Course(Course &&) noexcept;
        Course &operator=(Course &&) noexcept;

        // Processes events until the queue drains, then writes the final
        // evaluation and summary. Throws CourseStalled.
        void run();

        // Processes events until the server reaches version k or the queue
        // drains. Returns true when version k was reached.
        bool run_until_round(std::int64_t k);

        // Complete engine state. Restoring it and continuing writes the same
        // log lines the uninterrupted course would have written.
        msgflow::Bytes checkpoint() const;
        static Course restore(CourseConfig config, World world, std::span<const std::uint8_t> bytes,
                              std::ostream *log);

        const ServerState &server() const noexcept;
        const RunCounters &counters() const noexcept;
        const msgflow::HandlerRegistry &registry() const noexcept;
        const CourseConfig &config() const noexcept;
        VirtualTime now() const noexcept;
        bool finished() const noexcept;
        bool done() const noexcept;

        learnkit::EvalResult evaluate_global(learnkit::Split split) const;
        // Test accuracy of every client with a non-empty test split.
        std::map<ParticipantId, double> client_accuracies() const;

    private:
        struct Impl;
        explicit Course(std::unique_ptr<Impl> impl);
        std::unique_ptr<Impl> m_impl;
    };

    // Reads the header fields of a checkpoint without a world.
    struct CheckpointInfo
    {
        std::int64_t format = 0;
        std::int64_t round = 0;
        std::uint64_t seed = 0;
        VirtualTime time = 0.0;
    };
    CheckpointInfo inspect_checkpoint(std::span<const std::uint8_t> bytes);
} // namespace fedsim::fedcore
