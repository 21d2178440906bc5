#pragma once

#include "fedsim/msgflow/codec.hpp"
#include "fedsim/simnet/rng.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fedsim::autotune
{
    enum class Scale
    {
        Linear,
        Log,
        // Integer-valued, uniform over [lo, hi].
        Integer,
        Categorical,
    };

    struct Dimension
    {
        // Config key the sampled value is written to, e.g. "trainer.learning_rate".
        std::string name;
        Scale scale = Scale::Linear;
        double lo = 0.0;
        double hi = 1.0;
        std::vector<std::string> choices;
    };

    struct SearchSpace
    {
        std::vector<Dimension> dims;
    };

    // Throws ValidationError for empty or duplicate names, lo >= hi, a
    // non-positive lower end on a log dimension or an empty choice list.
    void validate(const SearchSpace &space);

    using ParamValue = std::variant<double, std::int64_t, std::string>;
    using Assignment = std::map<std::string, ParamValue>;

    std::string to_string(const ParamValue &v);

    // One value per dimension: uniform, log-uniform, uniform integer or a
    // uniformly chosen category.
    Assignment sample_assignment(const SearchSpace &space, simnet::SeededRng &rng);

    struct TrainOutcome
    {
        double val_loss = std::numeric_limits<double>::infinity();
        msgflow::Bytes checkpoint;
        // Rounds trained in total, including rounds before the checkpoint.
        std::int64_t rounds_total = 0;
    };

    // Trains `rounds` more rounds for an assignment, from scratch or from a
    // checkpoint it produced earlier. Must be callable from several threads.
    class Objective
    {
    public:
        virtual ~Objective() = default;
        virtual TrainOutcome train(const Assignment &assignment, const std::optional<msgflow::Bytes> &checkpoint,
                                   std::int64_t rounds) const = 0;
    };

    struct TrialRecord
    {
        std::size_t index = 0;
        int rung = 0;
        Assignment assignment;
        std::int64_t rounds_trained = 0;
        std::int64_t rounds_total = 0;
        double val_loss = std::numeric_limits<double>::infinity();
        std::string error;

        bool failed() const noexcept { return !error.empty(); }
    };

    struct SearchResult
    {
        std::size_t best_index = 0;
        Assignment best;
        double best_loss = std::numeric_limits<double>::infinity();
        // Ordered by (rung, trial index).
        std::vector<TrialRecord> trials;
        // Configurations trained at each rung, then the final survivor count.
        std::vector<std::size_t> survivors;
        std::int64_t total_rounds = 0;
    };

    struct SearchOptions
    {
        std::uint64_t seed = 0;
        // Worker threads; results are merged by trial index.
        std::size_t workers = 1;
    };

    // Samples `budget` assignments and trains each for rounds_per_trial
    // rounds. Throws SearchFailed when every trial fails.
    SearchResult random_search(const SearchSpace &space, std::size_t budget, std::int64_t rounds_per_trial,
                               const Objective &objective, const SearchOptions &options);

    // n0 assignments; at each rung the survivors train rounds_per_rung more
    // rounds from their checkpoints and the best ceil(n / rate) by
    // validation loss (ties by index) advance. Requires n0 >= rate^(rungs-1).
    SearchResult successive_halving(const SearchSpace &space, std::size_t n0, std::size_t rate, int rungs,
                                    std::int64_t rounds_per_rung, const Objective &objective,
                                    const SearchOptions &options);

    void write_trials_csv(std::ostream &os, const SearchResult &result);
} // namespace fedsim::autotune
