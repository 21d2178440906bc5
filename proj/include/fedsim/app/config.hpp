#pragma once

#include "fedsim/autotune/search.hpp"
#include "fedsim/fedcore/course.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace YAML
{
    class Node;
}

namespace fedsim::app
{
    struct DataConfig
    {
        std::size_t num_clients = 20;
        std::size_t num_classes = 10;
        std::size_t dim = 20;
        // Pool size is samples_per_client * num_clients unless n_total is set.
        std::size_t samples_per_client = 100;
        std::size_t n_total = 0;
        double separation = 2.0;
        // "iid" or "dirichlet"
        std::string partition = "dirichlet";
        double alpha = 0.5;
        std::vector<int> rare_labels;
        double slow_fraction = 0.1;
        // Share of each client's rows used for training; the rest is its test split.
        double train_fraction = 0.8;
        // Rows in each of the global validation and test splits.
        std::size_t eval_size = 1000;

        std::size_t pool_size() const noexcept { return n_total > 0 ? n_total : samples_per_client * num_clients; }
    };

    struct LatencyConfig
    {
        // "lognormal" or "degenerate"
        std::string kind = "lognormal";
        // Per-client mean durations are log-uniform over these ranges.
        double comp_lo = 1.0;
        double comp_hi = 10.0;
        double comm_lo = 0.1;
        double comm_hi = 1.0;
        // Log-space standard deviation of lognormal durations.
        double sigma = 0.5;
        // A random share of clients whose means are multiplied by straggler_factor.
        double stragglers = 0.0;
        double straggler_factor = 1.0;
    };

    struct CandidateConfig
    {
        double learning_rate = 0.1;
        int local_steps = 1;

        bool operator==(const CandidateConfig &) const = default;
    };

    struct TrainerSection
    {
        int local_steps = 1;
        double learning_rate = 0.1;
        std::size_t batch_size = 0;
        std::vector<std::string> share_list;
        std::optional<double> ditto_lambda;
        std::vector<CandidateConfig> candidates;
    };

    struct ModelSection
    {
        std::string kind = "logistic";
        // Empty picks logistic_ce for classifiers and squared_error for quadratic.
        std::string loss;
        std::size_t hidden = 16;
        std::vector<double> curvature;
    };

    struct AggregatorSection
    {
        std::string kind = "fedavg";
        std::size_t krum_f = 0;
        bool weighted = true;
    };

    struct StrategySection
    {
        std::string trigger = "all_received";
        std::size_t goal = 1;
        double time_budget = 10.0;
        std::size_t min_feedback = 1;
        std::string manner = "after_aggregating";
        std::string sampler = "uniform";
        std::size_t num_groups = 1;
        std::size_t concurrency = 10;
        double over_selection_extra = 0.0;
        std::int64_t tau_max = 0;
        std::string discount = "inverse";
    };

    struct EvalSection
    {
        int cadence = 1;
        std::vector<double> target_accuracy;
        bool clientwise = false;
        double quantile = 0.9;
    };

    struct TerminationSection
    {
        std::int64_t max_rounds = 20;
        int patience = 0;
    };

    struct DpSection
    {
        double noisy_client_fraction = 0.0;
        double sigma = 0.0;
    };

    struct OutputSection
    {
        std::string dir = "fedsim_out";
        std::string log_level = "warn";
    };

    struct OverrideSection
    {
        std::string event;
        // "message" or "condition"
        std::string kind = "message";
        std::string id;
        std::vector<std::string> consumes;
        std::vector<std::string> produces;
        std::string role = "server";
    };

    struct ExperimentConfig
    {
        std::uint64_t seed = 0;
        DataConfig data;
        LatencyConfig latency;
        ModelSection model;
        TrainerSection trainer;
        AggregatorSection aggregator;
        StrategySection strategy;
        EvalSection eval;
        TerminationSection termination;
        DpSection dp;
        OutputSection output;
        std::vector<OverrideSection> overrides;
    };

    // Parses and validates. Unknown keys, type mismatches and invalid values
    // throw ConfigError naming the dotted key and, when known, the line.
    ExperimentConfig parse_config(const YAML::Node &root);
    ExperimentConfig parse_config_text(const std::string &text);
    ExperimentConfig load_config(const std::filesystem::path &path);

    // Every key with its effective value, in a form parse_config_text accepts.
    std::string to_yaml(const ExperimentConfig &config);

    fedcore::CourseConfig to_course_config(const ExperimentConfig &config);

    // Synthetic pool, latency profiles, partition, rare-label coupling and
    // noisy clients, all derived from config.seed.
    fedcore::World build_world(const ExperimentConfig &config);

    // Writes an assignment's values at their dotted keys. Keys under data.
    // or seed are rejected since the world is built once per search.
    void apply_assignment(YAML::Node &root, const autotune::Assignment &assignment);

    autotune::SearchSpace parse_search_space(const YAML::Node &root);
    autotune::SearchSpace load_search_space(const std::filesystem::path &path);
} // namespace fedsim::app
