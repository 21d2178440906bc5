#pragma once

#include "fedsim/learnkit/param_vector.hpp"
#include "fedsim/simnet/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fedsim::learnkit
{
    struct WeightedDelta
    {
        ParamVector delta;
        double num_samples = 1.0;
        double staleness_weight = 1.0;

        double weight() const noexcept { return num_samples * staleness_weight; }
    };

    // base + sum_i w_i * delta_i / sum_i w_i with w_i = num_samples * staleness_weight.
    // Throws EmptyAggregation on an empty buffer or zero total weight.
    ParamVector fedavg_aggregate(std::span<const WeightedDelta> buffer, const ParamVector &base);

    struct KrumChoice
    {
        std::size_t index = 0;
        std::vector<double> scores;
    };

    // Score of update i: sum of squared L2 distances to its n - f - 2 nearest
    // peers. The lowest score wins; ties go to the lowest index. Throws
    // InsufficientUpdates unless n >= f + 3.
    KrumChoice krum_select(std::span<const ParamVector> updates, std::size_t f);
    ParamVector krum_aggregate(std::span<const ParamVector> updates, std::size_t f);

    // Adds i.i.d. N(0, sigma^2) to every entry. sigma == 0 returns the input unchanged.
    ParamVector inject_dp_noise(const ParamVector &delta, double sigma, simnet::SeededRng &rng);
} // namespace fedsim::learnkit
