#include "fedsim/autotune/search.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/util/overloaded.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace fedsim::autotune
{
    namespace
    {
        struct Job
        {
            const Assignment *assignment = nullptr;
            const std::optional<msgflow::Bytes> *checkpoint = nullptr;
            std::int64_t rounds = 0;
        };

        struct JobResult
        {
            TrainOutcome outcome;
            std::string error;
        };

        // Runs every job on up to `workers` threads; result i belongs to job i.
        std::vector<JobResult> run_jobs(const std::vector<Job> &jobs, const Objective &objective, std::size_t workers)
        {
            std::vector<JobResult> results(jobs.size());
            auto run_one = [&](std::size_t i) {
                try
                {
                    results[i].outcome = objective.train(*jobs[i].assignment, *jobs[i].checkpoint, jobs[i].rounds);
                    if (!std::isfinite(results[i].outcome.val_loss))
                    {
                        results[i].error = "non-finite validation loss";
                    }
                }
                catch (const std::exception &e)
                {
                    results[i].error = e.what();
                }
            };
            workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, jobs.size()));
            if (workers == 1)
            {
                for (std::size_t i = 0; i < jobs.size(); ++i)
                {
                    run_one(i);
                }
                return results;
            }
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w)
            {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < jobs.size(); i = next++)
                    {
                        run_one(i);
                    }
                });
            }
            for (auto &t : pool)
            {
                t.join();
            }
            return results;
        }

        std::vector<Assignment> sample_cohort(const SearchSpace &space, std::size_t n, std::uint64_t seed)
        {
            std::vector<Assignment> out;
            out.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                simnet::SeededRng rng(seed, {simnet::Purpose::Search, 0, static_cast<std::int64_t>(i)});
                out.push_back(sample_assignment(space, rng));
            }
            return out;
        }

        void pick_best(SearchResult &r, int rung)
        {
            bool any = false;
            for (const auto &t : r.trials)
            {
                if (t.rung == rung && !t.failed() && (!any || t.val_loss < r.best_loss))
                {
                    any = true;
                    r.best_loss = t.val_loss;
                    r.best_index = t.index;
                    r.best = t.assignment;
                }
            }
            if (!any)
            {
                throw SearchFailed("every trial failed");
            }
        }
    } // namespace

    void validate(const SearchSpace &space)
    {
        if (space.dims.empty())
        {
            throw ValidationError("search space has no dimensions");
        }
        std::set<std::string> names;
        for (const auto &d : space.dims)
        {
            if (d.name.empty() || !names.insert(d.name).second)
            {
                throw ValidationError("search dimension names must be non-empty and unique ('" + d.name + "')");
            }
            if (d.scale == Scale::Categorical)
            {
                if (d.choices.empty())
                {
                    throw ValidationError("categorical dimension '" + d.name + "' has no choices");
                }
                continue;
            }
            if (!(d.lo < d.hi))
            {
                throw ValidationError("dimension '" + d.name + "' needs lo < hi");
            }
            if (d.scale == Scale::Log && !(d.lo > 0.0))
            {
                throw ValidationError("log dimension '" + d.name + "' needs lo > 0");
            }
        }
    }

    std::string to_string(const ParamValue &v)
    {
        return std::visit(Overloaded{[](double d) {
                                         std::ostringstream os;
                                         os.precision(17);
                                         os << d;
                                         return os.str();
                                     },
                                     [](std::int64_t i) { return std::to_string(i); },
                                     [](const std::string &s) { return s; }},
                          v);
    }

    Assignment sample_assignment(const SearchSpace &space, simnet::SeededRng &rng)
    {
        Assignment a;
        for (const auto &d : space.dims)
        {
            switch (d.scale)
            {
            case Scale::Linear:
                a[d.name] = rng.uniform(d.lo, d.hi);
                break;
            case Scale::Log:
                a[d.name] = std::exp(rng.uniform(std::log(d.lo), std::log(d.hi)));
                break;
            case Scale::Integer: {
                const auto lo = static_cast<std::int64_t>(std::ceil(d.lo));
                const auto hi = static_cast<std::int64_t>(std::floor(d.hi));
                a[d.name] = lo + static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(hi - lo + 1)));
                break;
            }
            case Scale::Categorical:
                a[d.name] = d.choices[rng.index(d.choices.size())];
                break;
            }
        }
        return a;
    }

    SearchResult random_search(const SearchSpace &space, std::size_t budget, std::int64_t rounds_per_trial,
                               const Objective &objective, const SearchOptions &options)
    {
        validate(space);
        if (budget < 1)
        {
            throw ValidationError("search budget must be at least 1");
        }
        if (rounds_per_trial < 1)
        {
            throw ValidationError("rounds per trial must be at least 1");
        }
        const auto cohort = sample_cohort(space, budget, options.seed);
        const std::optional<msgflow::Bytes> none;
        std::vector<Job> jobs;
        for (const auto &a : cohort)
        {
            jobs.push_back({&a, &none, rounds_per_trial});
        }
        const auto results = run_jobs(jobs, objective, options.workers);
        SearchResult r;
        for (std::size_t i = 0; i < cohort.size(); ++i)
        {
            TrialRecord t;
            t.index = i;
            t.assignment = cohort[i];
            t.rounds_trained = results[i].error.empty() ? results[i].outcome.rounds_total : 0;
            t.rounds_total = t.rounds_trained;
            t.val_loss = results[i].outcome.val_loss;
            t.error = results[i].error;
            r.total_rounds += t.rounds_trained;
            r.trials.push_back(std::move(t));
        }
        r.survivors = {budget};
        pick_best(r, 0);
        return r;
    }

    SearchResult successive_halving(const SearchSpace &space, std::size_t n0, std::size_t rate, int rungs,
                                    std::int64_t rounds_per_rung, const Objective &objective,
                                    const SearchOptions &options)
    {
        validate(space);
        if (rate < 2 || rungs < 1 || rounds_per_rung < 1)
        {
            throw ValidationError("successive halving needs rate >= 2, rungs >= 1 and rounds_per_rung >= 1");
        }
        if (static_cast<double>(n0) < std::pow(static_cast<double>(rate), rungs - 1))
        {
            throw ValidationError("successive halving needs n0 >= rate^(rungs-1)");
        }
        const auto cohort = sample_cohort(space, n0, options.seed);
        std::vector<std::optional<msgflow::Bytes>> checkpoints(n0);
        std::vector<std::int64_t> trained(n0, 0);
        std::vector<std::size_t> alive(n0);
        std::iota(alive.begin(), alive.end(), std::size_t{0});

        SearchResult r;
        for (int rung = 0; rung < rungs; ++rung)
        {
            r.survivors.push_back(alive.size());
            std::vector<Job> jobs;
            for (auto i : alive)
            {
                jobs.push_back({&cohort[i], &checkpoints[i], rounds_per_rung});
            }
            auto results = run_jobs(jobs, objective, options.workers);
            std::vector<std::pair<double, std::size_t>> ranking;
            for (std::size_t j = 0; j < alive.size(); ++j)
            {
                const std::size_t i = alive[j];
                TrialRecord t;
                t.index = i;
                t.rung = rung;
                t.assignment = cohort[i];
                t.error = results[j].error;
                t.val_loss = results[j].outcome.val_loss;
                if (t.error.empty())
                {
                    t.rounds_trained = results[j].outcome.rounds_total - trained[i];
                    trained[i] = results[j].outcome.rounds_total;
                    checkpoints[i] = std::move(results[j].outcome.checkpoint);
                    ranking.emplace_back(t.val_loss, i);
                }
                t.rounds_total = trained[i];
                r.total_rounds += t.rounds_trained;
                r.trials.push_back(std::move(t));
            }
            if (ranking.empty())
            {
                throw SearchFailed("every trial failed at rung " + std::to_string(rung));
            }
            std::sort(ranking.begin(), ranking.end());
            const std::size_t keep = rung + 1 < rungs ? (alive.size() + rate - 1) / rate : 1;
            alive.clear();
            for (std::size_t j = 0; j < std::min(keep, ranking.size()); ++j)
            {
                alive.push_back(ranking[j].second);
            }
            std::sort(alive.begin(), alive.end());
            // Drop checkpoints of eliminated configurations.
            for (std::size_t i = 0; i < n0; ++i)
            {
                if (!std::binary_search(alive.begin(), alive.end(), i))
                {
                    checkpoints[i].reset();
                }
            }
        }
        r.survivors.push_back(alive.size());
        pick_best(r, rungs - 1);
        return r;
    }

    void write_trials_csv(std::ostream &os, const SearchResult &result)
    {
        std::set<std::string> keys;
        for (const auto &t : result.trials)
        {
            for (const auto &[k, v] : t.assignment)
            {
                keys.insert(k);
            }
        }
        os << "trial,rung,rounds_trained,rounds_total,val_loss,error";
        for (const auto &k : keys)
        {
            os << ',' << k;
        }
        os << '\n';
        os.precision(17);
        for (const auto &t : result.trials)
        {
            std::string err = t.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            os << t.index << ',' << t.rung << ',' << t.rounds_trained << ',' << t.rounds_total << ',';
            if (!t.failed())
            {
                os << t.val_loss;
            }
            os << ',' << err;
            for (const auto &k : keys)
            {
                os << ',';
                if (auto it = t.assignment.find(k); it != t.assignment.end())
                {
                    os << to_string(it->second);
                }
            }
            os << '\n';
        }
    }
} // namespace fedsim::autotune
