#pragma once

#include "fedsim/analytics/runlog.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace fedsim::analytics
{
    // Earliest evaluation time on `split` with accuracy >= target. No
    // interpolation between evaluation points.
    std::optional<VirtualTime> time_to_target(const RunLog &log, double target, const std::string &split = "test");

    struct Histogram
    {
        std::map<std::int64_t, std::int64_t> counts;

        std::int64_t total() const noexcept;
        std::map<std::int64_t, double> normalized() const;
        double mean() const noexcept;
    };

    // Effective contributions of every client 1..num_clients (zeros included).
    std::map<ParticipantId, std::int64_t> agg_counts(const RunLog &log);
    // Histogram over those per-client counts.
    Histogram agg_count_distribution(const RunLog &log);

    struct StalenessDistribution
    {
        // One sample per contributing update per aggregation.
        Histogram hist;
        // Updates dropped for staleness, release or the aggregation rule.
        std::int64_t dropped = 0;
    };
    StalenessDistribution staleness_distribution(const RunLog &log);

    struct ClientwiseStats
    {
        double mean = 0.0;
        double quantile = 0.0;
        // Population standard deviation.
        double stddev = 0.0;
        std::size_t count = 0;
    };

    // Nearest-rank quantile: the ceil(q * n)-th smallest value. Throws
    // ValidationError for an empty map or q outside (0, 1).
    ClientwiseStats clientwise_stats(const std::map<ParticipantId, double> &per_client_acc, double q);

    struct Reconciliation
    {
        std::int64_t received = 0;
        std::int64_t contributed = 0;
        std::int64_t dropped = 0;
        std::int64_t buffered_at_end = 0;

        // Every received update contributed, was dropped, or was still
        // buffered when the course ended.
        bool balanced() const noexcept { return received == contributed + dropped + buffered_at_end; }
    };
    Reconciliation reconcile(const RunLog &log);

    // Writes time_to_target.csv, eval.csv, agg_count_hist.csv,
    // staleness_hist.csv, clientwise.csv and summary.json into `dir` and
    // returns the JSON summary text.
    std::string write_report(const RunLog &log, const std::filesystem::path &dir,
                             const std::vector<double> &targets, double quantile = 0.9);
} // namespace fedsim::analytics
