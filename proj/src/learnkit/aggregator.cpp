#include "fedsim/learnkit/aggregator.hpp"

#include "fedsim/errors.hpp"

#include <algorithm>
#include <string>

namespace fedsim::learnkit
{
    ParamVector fedavg_aggregate(std::span<const WeightedDelta> buffer, const ParamVector &base)
    {
        if (buffer.empty())
        {
            throw EmptyAggregation();
        }
        double total = 0.0;
        for (const auto &e : buffer)
        {
            if (!(e.weight() >= 0.0))
            {
                throw ValidationError("aggregation weights must be non-negative");
            }
            total += e.weight();
        }
        if (!(total > 0.0))
        {
            throw EmptyAggregation();
        }
        ParamVector mean = base.zeros_like();
        for (const auto &e : buffer)
        {
            if (e.weight() > 0.0)
            {
                mean.axpy(e.weight() / total, e.delta);
            }
        }
        return base + mean;
    }

    KrumChoice krum_select(std::span<const ParamVector> updates, std::size_t f)
    {
        const std::size_t n = updates.size();
        if (n < f + 3)
        {
            throw InsufficientUpdates("krum with f=" + std::to_string(f) + " needs at least " + std::to_string(f + 3) +
                                      " updates, got " + std::to_string(n));
        }
        const std::size_t neighbours = n - f - 2;
        std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = i + 1; j < n; ++j)
            {
                dist[i][j] = dist[j][i] = squared_distance(updates[i], updates[j]);
            }
        }
        KrumChoice choice;
        choice.scores.resize(n);
        std::vector<double> row;
        for (std::size_t i = 0; i < n; ++i)
        {
            row.clear();
            for (std::size_t j = 0; j < n; ++j)
            {
                if (j != i)
                {
                    row.push_back(dist[i][j]);
                }
            }
            std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), row.end());
            double s = 0.0;
            for (std::size_t k = 0; k < neighbours; ++k)
            {
                s += row[k];
            }
            choice.scores[i] = s;
            if (s < choice.scores[choice.index])
            {
                choice.index = i;
            }
        }
        return choice;
    }

    ParamVector krum_aggregate(std::span<const ParamVector> updates, std::size_t f)
    {
        return updates[krum_select(updates, f).index];
    }

    ParamVector inject_dp_noise(const ParamVector &delta, double sigma, simnet::SeededRng &rng)
    {
        if (!(sigma >= 0.0))
        {
            throw ValidationError("noise sigma must be non-negative");
        }
        ParamVector out = delta;
        if (sigma == 0.0)
        {
            return out;
        }
        for (auto &g : out.groups())
        {
            for (auto &v : g.values)
            {
                v += rng.normal(0.0, sigma);
            }
        }
        return out;
    }
} // namespace fedsim::learnkit
