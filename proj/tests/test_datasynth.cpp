#include "fedsim/datasynth/synth.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/learnkit/model.hpp"
#include "fedsim/learnkit/trainer.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace fedsim;
using namespace fedsim::datasynth;

namespace
{
    std::vector<std::size_t> all_rows(const LabeledPool &pool)
    {
        std::vector<std::size_t> rows(pool.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        return rows;
    }

    // Centralized full-batch logistic regression; returns test accuracy.
    double centralized_accuracy(const LabeledPool &pool)
    {
        const auto data = to_dataset(pool, all_rows(pool), 0.7, 1);
        learnkit::TrainerConfig cfg;
        cfg.model.input_dim = pool.dim;
        cfg.model.num_classes = pool.num_classes;
        cfg.learning_rate = 0.5;
        cfg.local_steps = 300;
        simnet::SeededRng rng(0, {simnet::Purpose::Batches, 0, 0});
        auto params = learnkit::init_params(cfg.model, rng);
        params += learnkit::local_train_sgd(params, data, cfg, rng);
        return learnkit::evaluate(cfg.model, params, data, learnkit::Split::Test).accuracy.value();
    }

    std::vector<simnet::ClientProfile> profiles_with_speeds(const std::vector<double> &comp)
    {
        std::vector<simnet::ClientProfile> out;
        for (std::size_t i = 0; i < comp.size(); ++i)
        {
            out.push_back({static_cast<ParticipantId>(i + 1), simnet::Degenerate{comp[i]}, simnet::Degenerate{0.1}});
        }
        return out;
    }
} // namespace

TEST_CASE("classification pool: shape, balance and determinism")
{
    const auto a = gen_classification(4, 6, 103, 2.0, 5);
    const auto b = gen_classification(4, 6, 103, 2.0, 5);
    CHECK(a.size() == 103);
    CHECK(a.features.size() == 103 * 6);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    const auto counts = a.class_counts();
    CHECK(*std::min_element(counts.begin(), counts.end()) >= 25);
    CHECK(gen_classification(4, 6, 103, 2.0, 6).features != a.features);
    CHECK_THROWS(gen_classification(4, 3, 10, 1.0, 1));
}

TEST_CASE("classification pool: separation 0 gives chance accuracy, large separation is linearly separable")
{
    CHECK(std::abs(centralized_accuracy(gen_classification(4, 4, 2000, 0.0, 3)) - 0.25) < 0.06);
    CHECK(centralized_accuracy(gen_classification(4, 4, 2000, 10.0, 3)) > 0.99);
}

TEST_CASE("partition: a single client receives every row")
{
    const auto pool = gen_classification(3, 3, 50, 1.0, 1);
    for (const auto &p : {partition_iid(pool, 1, 2), partition_dirichlet(pool, 1, 0.5, 2)})
    {
        REQUIRE(p.num_clients() == 1);
        auto rows = p.assignment.at(1);
        std::sort(rows.begin(), rows.end());
        CHECK(rows == all_rows(pool));
    }
}

TEST_CASE("partition property: disjoint cover for every alpha and seed")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto pool = gen_classification(5, 5, 400, 1.0, seed);
        CHECK_NOTHROW(check_disjoint_cover(partition_iid(pool, 7, seed), pool.size()));
        for (double alpha : {0.05, 0.1, 0.5, 1.0, 10.0, 100.0})
        {
            const auto p = partition_dirichlet(pool, 12, alpha, seed, 4);
            CHECK(p.total() == pool.size());
            CHECK_NOTHROW(check_disjoint_cover(p, pool.size()));
            for (const auto &[client, rows] : p.assignment)
            {
                CHECK(rows.size() >= 4);
            }
        }
    }
}

TEST_CASE("partition: cover checker rejects overlaps and gaps")
{
    Partition p;
    p.assignment[1] = {0, 1};
    p.assignment[2] = {1, 2};
    CHECK_THROWS_AS(check_disjoint_cover(p, 3), PartitionError);
    p.assignment[2] = {2};
    CHECK_THROWS_AS(check_disjoint_cover(p, 4), PartitionError);
    CHECK_NOTHROW(check_disjoint_cover(p, 3));
}

TEST_CASE("partition: an unsatisfiable minimum size is rejected")
{
    const auto pool = gen_classification(2, 2, 10, 1.0, 1);
    CHECK_THROWS_AS(partition_dirichlet(pool, 4, 0.5, 1, 3), PartitionError);
}

TEST_CASE("partition property: mean label entropy is lower at alpha 0.1 than at alpha 100")
{
    double low = 0.0;
    double high = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const auto pool = gen_classification(10, 10, 2000, 1.0, seed);
        low += mean_label_entropy(pool, partition_dirichlet(pool, 20, 0.1, seed));
        high += mean_label_entropy(pool, partition_dirichlet(pool, 20, 100.0, seed));
    }
    CHECK(low < high);
}

TEST_CASE("entropy: uniform and single-label histograms")
{
    LabeledPool pool;
    pool.dim = 1;
    pool.num_classes = 4;
    pool.labels = {0, 1, 2, 3, 0, 0};
    pool.features.assign(6, 0.0);
    CHECK(label_entropy(pool, {0, 1, 2, 3}) == doctest::Approx(std::log(4.0)));
    CHECK(label_entropy(pool, {0, 4, 5}) == doctest::Approx(0.0));
    CHECK(label_histogram(pool, {0, 1, 4}) == std::vector<double>{2, 1, 0, 0});
}

TEST_CASE("rare labels: empty set leaves the partition unchanged")
{
    const auto pool = gen_classification(4, 4, 200, 1.0, 2);
    const auto p = partition_iid(pool, 10, 2);
    const auto profiles = profiles_with_speeds({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    CHECK(couple_rare_labels(p, pool, profiles, {}, 0.2).assignment == p.assignment);
}

TEST_CASE("rare labels: fast clients hold none, histograms differ only on rare classes")
{
    const auto pool = gen_classification(5, 5, 1000, 1.0, 3);
    const auto p = partition_iid(pool, 10, 3);
    // Compute time grows with the id, so clients 8, 9 and 10 are the slow 30%.
    // They hold 300 rows, enough room for the 200 rows of the rare class.
    const auto profiles = profiles_with_speeds({1, 1.5, 2, 2.5, 3, 3.5, 4, 10, 20, 30});
    const std::set<int> rare{4};
    CHECK(slowest_clients(profiles, 0.3) == std::set<ParticipantId>{8, 9, 10});
    const auto coupled = couple_rare_labels(p, pool, profiles, rare, 0.3);
    CHECK_NOTHROW(check_disjoint_cover(coupled, pool.size()));

    std::vector<double> fast(5, 0.0);
    std::vector<double> slow(5, 0.0);
    for (const auto &[client, rows] : coupled.assignment)
    {
        CHECK(rows.size() == p.assignment.at(client).size());
        const auto h = label_histogram(pool, rows);
        auto &target = client >= 8 ? slow : fast;
        for (std::size_t k = 0; k < 5; ++k)
        {
            target[k] += h[k];
        }
    }
    CHECK(fast[4] == 0.0);
    CHECK(slow[4] == 200.0);
    // Common classes keep comparable per-client shares in both groups.
    const double fast_n = std::accumulate(fast.begin(), fast.end(), 0.0);
    const double slow_n = std::accumulate(slow.begin(), slow.end(), 0.0);
    for (int k : {0, 1, 2, 3})
    {
        CHECK(fast[k] / fast_n > 0.2);
        CHECK(slow[k] / slow_n > 0.0);
    }
    CHECK_THROWS_AS(couple_rare_labels(p, pool, profiles, {7}, 0.3), ConfigError);
}

TEST_CASE("to_dataset: train fraction and determinism")
{
    const auto pool = gen_classification(3, 3, 40, 1.0, 1);
    std::vector<std::size_t> rows{0, 5, 9, 12, 20, 33, 39, 17, 4, 8};
    const auto d = to_dataset(pool, rows, 0.8, 7);
    CHECK(d.rows() == 10);
    CHECK(d.train.size() == 8);
    CHECK(d.test.size() == 2);
    CHECK_NOTHROW(d.validate());
    CHECK(to_dataset(pool, rows, 0.8, 7).train == d.train);
    CHECK(to_dataset(pool, rows, 0.01, 7).train.size() == 1);
}

TEST_CASE("columnar export: header plus one line per row")
{
    const auto pool = gen_classification(2, 2, 6, 1.0, 1);
    const auto p = partition_iid(pool, 2, 1);
    std::ostringstream os;
    write_columnar(os, pool, &p);
    const auto text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
    CHECK(text.rfind("client\trow\tlabel", 0) == 0);
}
