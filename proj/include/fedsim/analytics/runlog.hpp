#pragma once

#include "fedsim/msgflow/message.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fedsim::analytics
{
    struct EvalPoint
    {
        VirtualTime t = 0.0;
        std::int64_t round = 0;
        std::string split;
        double loss = 0.0;
        std::optional<double> acc;
        bool final = false;
    };

    struct AggEvent
    {
        VirtualTime t = 0.0;
        std::int64_t round = 0;
        std::vector<ParticipantId> clients;
        std::vector<std::int64_t> staleness;
        std::vector<double> weights;
        std::vector<ParticipantId> released;
    };

    struct DropEvent
    {
        VirtualTime t = 0.0;
        std::int64_t round = 0;
        ParticipantId client = 0;
        std::string reason;
        std::int64_t staleness = 0;
    };

    // Parsed JSON-lines run log. The raw lines are kept so metrics can be
    // recomputed from exactly what was written.
    struct RunLog
    {
        std::vector<std::string> lines;

        int schema = 0;
        std::uint64_t seed = 0;
        std::string strategy;
        std::int64_t tau_max = 0;
        std::int64_t num_clients = 0;

        std::vector<EvalPoint> eval_points;
        std::vector<AggEvent> agg_events;
        std::vector<DropEvent> drops;
        // model_update deliveries to the server.
        std::int64_t updates_received = 0;
        std::int64_t max_simultaneous_sends = 0;

        bool has_summary = false;
        std::int64_t rounds = 0;
        VirtualTime final_time = 0.0;
        std::string stop_reason;
        std::int64_t buffered_at_end = 0;
        std::map<ParticipantId, double> client_acc;
    };

    // Throws ValidationError naming the line number on malformed input.
    RunLog parse_run_log(std::istream &in);
    RunLog load_run_log(const std::filesystem::path &path);
} // namespace fedsim::analytics
