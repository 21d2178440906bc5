#pragma once

#include "fedsim/learnkit/dataset.hpp"
#include "fedsim/learnkit/model.hpp"
#include "fedsim/learnkit/param_vector.hpp"
#include "fedsim/simnet/rng.hpp"

#include <optional>
#include <set>
#include <string>

namespace fedsim::learnkit
{
    struct TrainerConfig
    {
        ModelSpec model;
        int local_steps = 1;
        double learning_rate = 0.1;
        // Rows per minibatch, drawn uniformly with replacement from the train
        // split. 0 selects the full train split for every step.
        std::size_t batch_size = 0;
        // Groups exchanged with the server; empty means every group.
        std::set<std::string> share_list;
        std::optional<double> ditto_lambda;
        std::optional<double> dp_sigma;
    };

    // Throws ValidationError on Q < 1, eta <= 0, negative lambda/sigma, or a
    // share list naming groups the model does not have.
    void validate(const TrainerConfig &cfg);

    // theta_after - theta_before after exactly local_steps minibatch SGD steps
    // on the train split. Throws NumericalError (with the 1-based step) when a
    // loss or gradient turns non-finite.
    ParamVector local_train_sgd(const ParamVector &params, const Dataset &data, const TrainerConfig &cfg,
                                simnet::SeededRng &rng);

    struct DittoResult
    {
        ParamVector shared_delta;
        ParamVector new_local;
    };

    // Shared delta exactly as local_train_sgd on `global` (drawn first from
    // `rng`), then local_steps SGD steps on F(v) + lambda/2 * ||v - global||^2
    // starting from `local`.
    DittoResult local_train_ditto(const ParamVector &global, const ParamVector &local, const Dataset &data,
                                  const TrainerConfig &cfg, simnet::SeededRng &rng);
} // namespace fedsim::learnkit
