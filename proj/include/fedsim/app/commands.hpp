#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fedsim::app
{
    // Process exit codes.
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitError = 1;
    inline constexpr int kExitIncomplete = 2;
    inline constexpr int kExitStalled = 3;

    struct RunOptions
    {
        std::filesystem::path config;
        std::optional<std::uint64_t> seed;
        std::optional<std::filesystem::path> out;
    };

    // Writes effective_config.yaml, runlog.jsonl, metrics.csv and
    // checkpoint.bin into the output directory.
    int cmd_run(const RunOptions &options, std::ostream &out, std::ostream &err);

    struct CheckOptions
    {
        std::filesystem::path config;
        std::optional<std::filesystem::path> dot;
    };

    int cmd_check(const CheckOptions &options, std::ostream &out, std::ostream &err);

    struct ReportOptions
    {
        std::filesystem::path runlog;
        std::optional<std::filesystem::path> out;
        std::vector<double> targets;
        double quantile = 0.9;
    };

    int cmd_report(const ReportOptions &options, std::ostream &out, std::ostream &err);

    struct HpoOptions
    {
        std::filesystem::path config;
        std::filesystem::path space;
        std::string method = "rs";
        // Random search: trial count. Successive halving: initial configurations.
        std::size_t budget = 8;
        // Rounds per trial (rs) or per rung (sha).
        std::int64_t rounds = 5;
        int rungs = 3;
        std::size_t rate = 2;
        std::size_t workers = 1;
        std::optional<std::uint64_t> seed;
        std::optional<std::filesystem::path> out;
    };

    // Writes trials.csv and best_config.yaml.
    int cmd_hpo(const HpoOptions &options, std::ostream &out, std::ostream &err);

    // Applies FEDSIM_LOG when set, otherwise `fallback`.
    void configure_logging(const std::string &fallback);
} // namespace fedsim::app
