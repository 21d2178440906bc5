#pragma once

// Small synthetic worlds and course configs shared by the engine tests.

#include "fedsim/analytics/runlog.hpp"
#include "fedsim/datasynth/synth.hpp"
#include "fedsim/fedcore/course.hpp"

#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace fedsim::test_support
{
    inline simnet::ClientProfile fixed_profile(ParticipantId id, double comp, double comm)
    {
        return {id, simnet::Degenerate{comp}, simnet::Degenerate{comm}};
    }

    inline simnet::ClientProfile lognormal_profile(ParticipantId id, double comp, double comm, double sigma = 0.5)
    {
        return {id, simnet::LogNormal::with_mean(comp, sigma), simnet::LogNormal::with_mean(comm, sigma)};
    }

    // Three-class data in three dimensions, iid across clients, plus a global
    // evaluation set split evenly into validation and test.
    inline fedcore::World make_world(std::vector<simnet::ClientProfile> profiles, std::size_t rows_per_client = 20,
                                     std::uint64_t seed = 1)
    {
        const std::size_t m = profiles.size();
        const auto pool = datasynth::gen_classification(3, 3, rows_per_client * m, 2.0, seed);
        const auto partition = datasynth::partition_iid(pool, m, seed);
        fedcore::World world;
        for (const auto &p : profiles)
        {
            world.clients.push_back({p, datasynth::to_dataset(pool, partition.assignment.at(p.client), 0.8, seed)});
        }
        const auto eval_pool = datasynth::gen_classification(3, 3, 200, 2.0, seed + 1000);
        std::vector<std::size_t> rows(eval_pool.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        world.eval_data = datasynth::to_dataset(eval_pool, rows, 0.5, seed);
        world.eval_data.validation = world.eval_data.train;
        world.eval_data.train.clear();
        return world;
    }

    inline std::vector<simnet::ClientProfile> fixed_profiles(const std::vector<double> &comp, double comm)
    {
        std::vector<simnet::ClientProfile> out;
        for (std::size_t i = 0; i < comp.size(); ++i)
        {
            out.push_back(fixed_profile(static_cast<ParticipantId>(i + 1), comp[i], comm));
        }
        return out;
    }

    inline std::vector<simnet::ClientProfile> spread_profiles(std::size_t m, std::uint64_t seed, double sigma = 0.5)
    {
        simnet::SeededRng rng(seed, {simnet::Purpose::Latency, 0, 0});
        std::vector<simnet::ClientProfile> out;
        for (std::size_t i = 0; i < m; ++i)
        {
            const double comp = std::exp(rng.uniform(std::log(1.0), std::log(10.0)));
            const double comm = std::exp(rng.uniform(std::log(0.1), std::log(1.0)));
            out.push_back(lognormal_profile(static_cast<ParticipantId>(i + 1), comp, comm, sigma));
        }
        return out;
    }

    inline fedcore::CourseConfig base_config(std::uint64_t seed = 1)
    {
        fedcore::CourseConfig c;
        c.seed = seed;
        c.trainer.model.kind = learnkit::ModelKind::LogisticRegression;
        c.trainer.model.loss = learnkit::LossKind::LogisticCE;
        c.trainer.model.input_dim = 3;
        c.trainer.model.num_classes = 3;
        c.trainer.local_steps = 2;
        c.trainer.learning_rate = 0.2;
        c.trainer.batch_size = 4;
        c.max_rounds = 5;
        return c;
    }

    struct RunResult
    {
        std::string text;
        analytics::RunLog log;
        fedcore::RunCounters counters;
        fedcore::ServerState server;
    };

    inline RunResult run_course(const fedcore::CourseConfig &config, const fedcore::World &world)
    {
        std::ostringstream os;
        fedcore::Course course(config, world, &os);
        course.run();
        RunResult r;
        r.text = os.str();
        std::istringstream in(r.text);
        r.log = analytics::parse_run_log(in);
        r.counters = course.counters();
        r.server = course.server();
        return r;
    }

    inline std::vector<std::string> split_lines(const std::string &text)
    {
        std::vector<std::string> out;
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);)
        {
            out.push_back(line);
        }
        return out;
    }
} // namespace fedsim::test_support
