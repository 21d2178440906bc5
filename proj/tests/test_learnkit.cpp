#include "fedsim/errors.hpp"
#include "fedsim/learnkit/aggregator.hpp"
#include "fedsim/learnkit/convergence.hpp"
#include "fedsim/learnkit/dataset.hpp"
#include "fedsim/learnkit/model.hpp"
#include "fedsim/learnkit/param_vector.hpp"
#include "fedsim/learnkit/trainer.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace fedsim;
using namespace fedsim::learnkit;
using simnet::Purpose;
using simnet::SeededRng;

namespace
{
    ParamVector pv(std::vector<double> theta)
    {
        ParamVector p;
        p.add_group("theta", std::move(theta));
        return p;
    }

    ParamVector wb(std::vector<double> w, std::vector<double> b)
    {
        ParamVector p;
        p.add_group("w", std::move(w));
        p.add_group("b", std::move(b));
        return p;
    }

    Dataset rows_dataset(std::size_t dim, const std::vector<std::vector<double>> &xs, const std::vector<double> &ys)
    {
        Dataset d;
        d.dim = dim;
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            d.append(xs[i], ys[i]);
            d.train.push_back(i);
        }
        return d;
    }

    ModelSpec quadratic(std::size_t dim, std::vector<double> curvature = {})
    {
        ModelSpec s;
        s.kind = ModelKind::Quadratic;
        s.loss = LossKind::SquaredError;
        s.input_dim = dim;
        s.curvature = std::move(curvature);
        return s;
    }

    Dataset random_classification(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        Dataset d;
        d.dim = dim;
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto y = static_cast<double>(i % classes);
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; ++j)
            {
                x[j] = normal(rng) + (j == i % classes ? 2.0 : 0.0);
            }
            d.append(x, y);
            (i % 5 == 0 ? d.test : d.train).push_back(i);
        }
        return d;
    }

    ParamVector random_like(const ParamVector &shape, std::mt19937_64 &rng, double scale = 1.0)
    {
        ParamVector p = shape;
        std::normal_distribution<double> normal(0.0, scale);
        for (auto &g : p.groups())
        {
            for (auto &v : g.values)
            {
                v = normal(rng);
            }
        }
        return p;
    }

    double norm(const std::vector<double> &v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }
} // namespace

TEST_CASE("param vector: arithmetic and shape checks")
{
    const auto a = wb({1, 2}, {3});
    const auto b = wb({10, 20}, {30});
    CHECK((a + b).flatten() == std::vector<double>{11, 22, 33});
    CHECK((b - a).flatten() == std::vector<double>{9, 18, 27});
    CHECK((2.0 * a).flatten() == std::vector<double>{2, 4, 6});
    CHECK(dot(a, b) == 140.0);
    CHECK(squared_distance(a, b) == 81.0 + 324.0 + 729.0);
    auto c = a;
    c.axpy(0.5, b);
    CHECK(c.flatten() == std::vector<double>{6, 12, 18});
    CHECK_THROWS_AS(a + pv({1, 2, 3}), ShapeMismatch);
    CHECK_THROWS_AS(a + wb({1}, {1}), ShapeMismatch);
    CHECK_THROWS_AS(ParamVector{}.add_group("w", {}).add_group("w", {}), ValidationError);
}

TEST_CASE("share list: all groups is the identity, empty is rejected, subsets merge back")
{
    const auto p = wb({1, 2}, {3});
    CHECK(filter_shared(p, {"w", "b"}) == p);
    CHECK_THROWS_AS(filter_shared(p, {}), ConfigError);
    CHECK_THROWS_AS(filter_shared(p, {"w", "nope"}), ConfigError);

    const auto shared = filter_shared(p, {"w"});
    CHECK(shared.group_names() == std::vector<std::string>{"w"});
    const auto local = wb({7, 8}, {9});
    const auto merged = merge_shared(local, shared);
    CHECK(merged.group("w") == std::vector<double>{1, 2});
    CHECK(merged.group("b") == std::vector<double>{9});
}

TEST_CASE("share list property: filter then merge is identity on shared groups, unshared untouched")
{
    std::mt19937_64 rng(4);
    ParamVector shape;
    shape.add_group("a", std::vector<double>(3)).add_group("b", std::vector<double>(2)).add_group("c", {0.0});
    const std::vector<std::string> names{"a", "b", "c"};
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto full = random_like(shape, rng);
        const auto other = random_like(shape, rng);
        std::set<std::string> share;
        for (const auto &n : names)
        {
            if (std::bernoulli_distribution(0.5)(rng))
            {
                share.insert(n);
            }
        }
        if (share.empty())
        {
            continue;
        }
        const auto merged = merge_shared(other, filter_shared(full, share));
        for (const auto &n : names)
        {
            CHECK(merged.group(n) == (share.contains(n) ? full.group(n) : other.group(n)));
        }
        CHECK(merge_shared(full, filter_shared(full, share)) == full);
    }
}

TEST_CASE("param vector: payload round trip")
{
    const auto p = wb({1.5, -2}, {0.25});
    CHECK(params_from_payload(to_payload(p)) == p);
}

TEST_CASE("local sgd: one full-batch step on (theta - 1)^2 / 2 from 0 gives +0.5")
{
    const auto data = rows_dataset(1, {{1.0}}, {0.0});
    TrainerConfig cfg;
    cfg.model = quadratic(1);
    cfg.learning_rate = 0.5;
    cfg.local_steps = 1;
    SeededRng rng(0, {Purpose::Batches, 1, 0});
    CHECK(local_train_sgd(pv({0.0}), data, cfg, rng).group("theta")[0] == doctest::Approx(0.5));
}

TEST_CASE("local sgd: three steps follow 1 - (1 - eta)^Q")
{
    const auto data = rows_dataset(1, {{1.0}}, {0.0});
    TrainerConfig cfg;
    cfg.model = quadratic(1);
    cfg.learning_rate = 0.5;
    cfg.local_steps = 3;
    SeededRng rng(0, {Purpose::Batches, 1, 0});
    const double delta = local_train_sgd(pv({0.0}), data, cfg, rng).group("theta")[0];
    CHECK(delta == doctest::Approx(1.0 - std::pow(0.5, 3)));
    CHECK(delta == doctest::Approx(0.875));
}

TEST_CASE("local sgd: same seed gives the same delta")
{
    const auto data = random_classification(60, 4, 3, 1);
    TrainerConfig cfg;
    cfg.model.input_dim = 4;
    cfg.model.num_classes = 3;
    cfg.local_steps = 5;
    cfg.batch_size = 8;
    SeededRng init(0, {Purpose::ModelInit, 0, 0});
    const auto p = init_params(cfg.model, init);
    SeededRng a(3, {Purpose::Batches, 2, 1});
    SeededRng b(3, {Purpose::Batches, 2, 1});
    CHECK(local_train_sgd(p, data, cfg, a) == local_train_sgd(p, data, cfg, b));
}

TEST_CASE("local sgd: divergence is reported with the step")
{
    const auto data = rows_dataset(1, {{1.0}}, {0.0});
    TrainerConfig cfg;
    cfg.model = quadratic(1, {1.0});
    cfg.learning_rate = 1e200;
    cfg.local_steps = 10;
    SeededRng rng(0, {Purpose::Batches, 1, 0});
    CHECK_THROWS_AS(local_train_sgd(pv({0.0}), data, cfg, rng), NumericalError);
}

TEST_CASE("trainer config validation")
{
    TrainerConfig cfg;
    cfg.local_steps = 0;
    CHECK_THROWS(validate(cfg));
    cfg.local_steps = 1;
    cfg.learning_rate = 0.0;
    CHECK_THROWS(validate(cfg));
    cfg.learning_rate = 0.1;
    cfg.ditto_lambda = -1.0;
    CHECK_THROWS(validate(cfg));
    cfg.ditto_lambda.reset();
    cfg.share_list = {"missing"};
    CHECK_THROWS(validate(cfg));
    cfg.share_list = {"weight"};
    CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("ditto: lambda 0 trains the local model as plain sgd")
{
    const auto data = rows_dataset(2, {{1.0, -1.0}, {3.0, 0.5}}, {0, 0});
    TrainerConfig cfg;
    cfg.model = quadratic(2, {1.0, 2.0});
    cfg.learning_rate = 0.2;
    cfg.local_steps = 4;
    cfg.ditto_lambda = 0.0;
    const auto global = pv({0.0, 0.0});
    const auto local = pv({5.0, -3.0});
    SeededRng rng(1, {Purpose::Batches, 1, 0});
    const auto r = local_train_ditto(global, local, data, cfg, rng);
    auto plain_cfg = cfg;
    plain_cfg.ditto_lambda.reset();
    SeededRng r2(1, {Purpose::Batches, 1, 0});
    const auto from_local = local + local_train_sgd(local, data, plain_cfg, r2);
    CHECK(squared_distance(r.new_local, from_local) < 1e-24);
    SeededRng r3(1, {Purpose::Batches, 1, 0});
    CHECK(r.shared_delta == local_train_sgd(global, data, plain_cfg, r3));
}

TEST_CASE("ditto: with zero data gradient one step moves toward the global model by eta*lambda")
{
    // The only row sits at the local model, so the data term has zero gradient there.
    const auto data = rows_dataset(2, {{2.0, -1.0}}, {0});
    TrainerConfig cfg;
    cfg.model = quadratic(2);
    cfg.learning_rate = 0.1;
    cfg.local_steps = 1;
    cfg.ditto_lambda = 3.0;
    const auto global = pv({0.0, 1.0});
    const auto local = pv({2.0, -1.0});
    SeededRng rng(1, {Purpose::Batches, 1, 0});
    const auto r = local_train_ditto(global, local, data, cfg, rng);
    const double step = 0.1 * 3.0;
    CHECK(r.new_local.group("theta")[0] == doctest::Approx(2.0 + step * (0.0 - 2.0)));
    CHECK(r.new_local.group("theta")[1] == doctest::Approx(-1.0 + step * (1.0 + 1.0)));
}

TEST_CASE("ditto: hand-evaluated single step")
{
    // v1 = v0 - eta * (h (v0 - x) + lambda (v0 - g)) with v0 = 2, x = 1, g = 0, h = 1, lambda = 1, eta = 0.1.
    const auto data = rows_dataset(1, {{1.0}}, {0});
    TrainerConfig cfg;
    cfg.model = quadratic(1);
    cfg.learning_rate = 0.1;
    cfg.local_steps = 1;
    cfg.ditto_lambda = 1.0;
    SeededRng rng(1, {Purpose::Batches, 1, 0});
    const auto r = local_train_ditto(pv({0.0}), pv({2.0}), data, cfg, rng);
    CHECK(r.new_local.group("theta")[0] == doctest::Approx(1.7));
}

TEST_CASE("ditto property: distance from the global model is non-increasing in lambda")
{
    const auto data = random_classification(80, 5, 3, 2);
    TrainerConfig cfg;
    cfg.model.input_dim = 5;
    cfg.model.num_classes = 3;
    cfg.learning_rate = 0.05;
    cfg.local_steps = 10;
    std::mt19937_64 gen(8);
    SeededRng init(0, {Purpose::ModelInit, 0, 0});
    const auto shape = init_params(cfg.model, init);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto global = random_like(shape, gen, 0.5);
        const auto local = random_like(shape, gen, 0.5);
        double previous = std::numeric_limits<double>::infinity();
        for (double lambda : {0.0, 0.1, 1.0, 10.0})
        {
            cfg.ditto_lambda = lambda;
            SeededRng rng(trial, {Purpose::Batches, 1, 0});
            const double d = std::sqrt(squared_distance(local_train_ditto(global, local, data, cfg, rng).new_local,
                                                        global));
            CHECK(d <= previous + 1e-12);
            previous = d;
        }
    }
}

TEST_CASE("fedavg: equal weights average the deltas")
{
    const std::vector<WeightedDelta> buf{{pv({1, 3})}, {pv({3, 5})}};
    CHECK(fedavg_aggregate(buf, pv({0, 0})).flatten() == std::vector<double>{2, 4});
}

TEST_CASE("fedavg: sample counts weight the mean")
{
    const std::vector<WeightedDelta> buf{{pv({0, 0}), 1.0}, {pv({4, 4}), 3.0}};
    CHECK(fedavg_aggregate(buf, pv({0, 0})).flatten() == std::vector<double>{3, 3});
}

TEST_CASE("fedavg: a zero staleness weight excludes the entry")
{
    const std::vector<WeightedDelta> buf{{pv({9, 9}), 5.0, 0.0}, {pv({1, 2}), 2.0, 0.5}};
    CHECK(fedavg_aggregate(buf, pv({1, 1})).flatten() == std::vector<double>{2, 3});
}

TEST_CASE("fedavg: empty buffers and zero total weight are rejected")
{
    CHECK_THROWS_AS(fedavg_aggregate(std::vector<WeightedDelta>{}, pv({0})), EmptyAggregation);
    const std::vector<WeightedDelta> zero{{pv({1}), 1.0, 0.0}};
    CHECK_THROWS_AS(fedavg_aggregate(zero, pv({0})), EmptyAggregation);
}

TEST_CASE("krum: identical updates return that update")
{
    const std::vector<ParamVector> ups(5, pv({1, 2}));
    const auto choice = krum_select(ups, 1);
    CHECK(choice.index == 0);
    CHECK(krum_aggregate(ups, 1) == pv({1, 2}));
}

TEST_CASE("krum: an outlier is never selected")
{
    std::vector<ParamVector> ups{pv({0.1, 0}), pv({0, 0.1}), pv({-0.1, 0}), pv({0, -0.1}), pv({0.05, 0.05}),
                                 pv({100, 0})};
    const auto choice = krum_select(ups, 1);
    CHECK(choice.index != 5);
    // Brute force: each score sums the 3 nearest squared distances.
    std::vector<double> expected;
    for (std::size_t i = 0; i < ups.size(); ++i)
    {
        std::vector<double> d;
        for (std::size_t j = 0; j < ups.size(); ++j)
        {
            if (i != j)
            {
                d.push_back(squared_distance(ups[i], ups[j]));
            }
        }
        std::sort(d.begin(), d.end());
        expected.push_back(d[0] + d[1] + d[2]);
    }
    for (std::size_t i = 0; i < ups.size(); ++i)
    {
        CHECK(choice.scores[i] == doctest::Approx(expected[i]));
    }
    CHECK(choice.index == static_cast<std::size_t>(std::min_element(expected.begin(), expected.end()) - expected.begin()));
}

TEST_CASE("krum: n=4, f=1 scores use exactly one neighbour")
{
    const std::vector<ParamVector> ups{pv({0}), pv({1}), pv({3}), pv({7})};
    const auto choice = krum_select(ups, 1);
    CHECK(choice.scores == std::vector<double>{1, 1, 4, 16});
    CHECK(choice.index == 0);
    CHECK_THROWS_AS(krum_select(std::span(ups.data(), 3), 1), InsufficientUpdates);
}

TEST_CASE("dp noise: sigma 0 is the identity, seeds reproduce, moments match")
{
    const auto d = pv({1, 2, 3});
    SeededRng r0(1, {Purpose::DpNoise, 1, 0});
    CHECK(inject_dp_noise(d, 0.0, r0) == d);
    SeededRng a(1, {Purpose::DpNoise, 1, 0});
    SeededRng b(1, {Purpose::DpNoise, 1, 0});
    CHECK(inject_dp_noise(d, 0.3, a) == inject_dp_noise(d, 0.3, b));

    const auto zeros = pv(std::vector<double>(100000, 0.0));
    SeededRng rng(5, {Purpose::DpNoise, 2, 0});
    const auto noisy = inject_dp_noise(zeros, 1.0, rng).group("theta");
    const double mean = std::accumulate(noisy.begin(), noisy.end(), 0.0) / noisy.size();
    double var = 0.0;
    for (double x : noisy)
    {
        var += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(var / noisy.size());
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sd - 1.0) < 0.02);
}

TEST_CASE("evaluate: a perfectly separated dataset scores accuracy 1")
{
    ModelSpec spec;
    spec.input_dim = 1;
    spec.num_classes = 2;
    Dataset d;
    d.dim = 1;
    for (double x : {-2.0, -1.0, 1.0, 2.0})
    {
        d.append(std::vector<double>{x}, x > 0 ? 1.0 : 0.0);
        d.test.push_back(d.rows() - 1);
    }
    ParamVector p;
    p.add_group("weight", {-5.0, 5.0}).add_group("bias", {0.0, 0.0});
    CHECK(evaluate(spec, p, d, Split::Test).accuracy.value() == 1.0);
}

TEST_CASE("evaluate: zero logistic weights on balanced binary data give ln 2 and accuracy 0.5")
{
    ModelSpec spec;
    spec.input_dim = 2;
    spec.num_classes = 2;
    auto d = random_classification(100, 2, 2, 3);
    d.test.clear();
    d.train.clear();
    for (std::size_t i = 0; i < d.rows(); ++i)
    {
        d.test.push_back(i);
    }
    SeededRng rng(0, {Purpose::ModelInit, 0, 0});
    const auto r = evaluate(spec, init_params(spec, rng), d, Split::Test);
    CHECK(r.loss == doctest::Approx(std::log(2.0)));
    CHECK(r.accuracy.value() == doctest::Approx(0.5).epsilon(0.05));
    CHECK(r.count == 100);
}

TEST_CASE("evaluate: three-point squared error by hand")
{
    // Predictions 1, 3, 5 against targets 1, 2, 3: residuals 0, 1, 2, mean of r^2/2 = 5/6.
    ModelSpec spec;
    spec.input_dim = 1;
    spec.loss = LossKind::SquaredError;
    Dataset d;
    d.dim = 1;
    for (int i = 0; i < 3; ++i)
    {
        d.append(std::vector<double>{static_cast<double>(i)}, i + 1.0);
        d.test.push_back(i);
    }
    ParamVector p;
    p.add_group("weight", {2.0}).add_group("bias", {1.0});
    const auto r = evaluate(spec, p, d, Split::Test);
    CHECK(r.loss == doctest::Approx(5.0 / 6.0));
    CHECK_FALSE(r.accuracy.has_value());
    d.test.clear();
    CHECK_THROWS_AS(evaluate(spec, p, d, Split::Test), EmptyEvaluation);
}

TEST_CASE("gradient property: analytic gradients match central differences")
{
    struct Case
    {
        ModelKind kind;
        LossKind loss;
    };
    const std::vector<Case> cases{{ModelKind::Quadratic, LossKind::SquaredError},
                                  {ModelKind::LogisticRegression, LossKind::SquaredError},
                                  {ModelKind::LogisticRegression, LossKind::LogisticCE},
                                  {ModelKind::Mlp, LossKind::SquaredError},
                                  {ModelKind::Mlp, LossKind::LogisticCE}};
    auto data = random_classification(12, 3, 3, 4);
    std::mt19937_64 gen(21);
    for (const auto &c : cases)
    {
        ModelSpec spec;
        spec.kind = c.kind;
        spec.loss = c.loss;
        spec.input_dim = 3;
        spec.num_classes = 3;
        spec.hidden = 4;
        if (c.kind == ModelKind::Quadratic)
        {
            spec.curvature = {0.5, 1.0, 3.0};
        }
        SeededRng init(0, {Purpose::ModelInit, 0, 0});
        const auto shape = init_params(spec, init);
        double worst = 0.0;
        for (int point = 0; point < 100; ++point)
        {
            const auto params = random_like(shape, gen);
            const auto analytic = loss_and_grad(spec, params, data, data.train).grad.flatten();
            std::vector<double> numeric;
            for (std::size_t g = 0; g < params.num_groups(); ++g)
            {
                for (std::size_t i = 0; i < params.groups()[g].values.size(); ++i)
                {
                    const double h = 1e-5;
                    auto plus = params;
                    auto minus = params;
                    plus.groups()[g].values[i] += h;
                    minus.groups()[g].values[i] -= h;
                    numeric.push_back((mean_loss(spec, plus, data, data.train) -
                                       mean_loss(spec, minus, data, data.train)) /
                                      (2 * h));
                }
            }
            std::vector<double> diff(analytic.size());
            for (std::size_t i = 0; i < diff.size(); ++i)
            {
                diff[i] = analytic[i] - numeric[i];
            }
            const double rel = norm(diff) / std::max({norm(analytic), norm(numeric), 1e-8});
            worst = std::max(worst, rel);
        }
        INFO(to_string(c.kind) << "/" << to_string(c.loss));
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("minibatch property: the mean minibatch gradient matches the full-batch gradient")
{
    auto data = random_classification(30, 3, 3, 9);
    TrainerConfig cfg;
    cfg.model.input_dim = 3;
    cfg.model.num_classes = 3;
    cfg.local_steps = 1;
    cfg.learning_rate = 1.0;
    cfg.batch_size = 4;
    std::mt19937_64 gen(2);
    SeededRng init(0, {Purpose::ModelInit, 0, 0});
    const auto params = random_like(init_params(cfg.model, init), gen, 0.3);
    const auto full = loss_and_grad(cfg.model, params, data, data.train).grad.flatten();

    const int draws = 10000;
    std::vector<double> sum(full.size(), 0.0);
    std::vector<double> sum_sq(full.size(), 0.0);
    for (int i = 0; i < draws; ++i)
    {
        SeededRng rng(1, {Purpose::Batches, 1, i});
        // One step at eta = 1: delta = -minibatch gradient.
        const auto g = local_train_sgd(params, data, cfg, rng).flatten();
        for (std::size_t j = 0; j < g.size(); ++j)
        {
            sum[j] -= g[j];
            sum_sq[j] += g[j] * g[j];
        }
    }
    for (std::size_t j = 0; j < full.size(); ++j)
    {
        const double mean = sum[j] / draws;
        const double var = sum_sq[j] / draws - mean * mean;
        const double se = std::sqrt(std::max(var, 0.0) / draws);
        CHECK(std::abs(mean - full[j]) <= 5.0 * se + 1e-12);
    }
}

TEST_CASE("convergence bound: noiseless case is pure geometric decay")
{
    ConvergenceBoundParams p;
    p.L = 4.0;
    p.mu = 1.0;
    p.Q = 4;
    p.eta = 0.05;
    p.T = 17;
    p.initial_gap = 3.0;
    p.tau_max = 3;
    CHECK(convergence_bound(p) == doctest::Approx(std::pow(1.0 - 0.2, 17) * 3.0));
    CHECK(convergence_floor(p) == 0.0);
}

TEST_CASE("convergence bound: floor scales with tau_max^2 + 1")
{
    ConvergenceBoundParams p;
    p.L = 2.0;
    p.mu = 0.5;
    p.Q = 2;
    p.eta = 0.1;
    p.sigma_l = 1.0;
    p.tau_max = 0;
    const double f0 = convergence_floor(p);
    p.tau_max = 5;
    const double f5 = convergence_floor(p);
    const double eqL = 0.1 * 2 * 2.0;
    CHECK(f5 / f0 == doctest::Approx((eqL * 26 + 0.5) / (eqL * 1 + 0.5)));
}

TEST_CASE("convergence bound: full parameter set against independent arithmetic")
{
    ConvergenceBoundParams p{3.0, 0.7, 3, 0.04, 25, 0.8, 0.3, 0.2, 2, 5.0};
    // Written out term by term.
    const double contraction = std::exp(25 * std::log(1 - 0.7 * 3 * 0.04));
    const double noise = 0.64 + 0.09 + 0.2;
    const double lead = 3 * 3.0 * 3 * 0.04 / 0.7;
    const double bracket = 0.04 * 3 * 3.0 * (4 + 1) + 0.5;
    CHECK(convergence_bound(p) == doctest::Approx(contraction * 5.0 + lead * noise * bracket).epsilon(1e-12));

    p.eta = 1.0;
    CHECK_THROWS_AS(convergence_bound(p), DomainError);
    p.eta = 0.04;
    p.mu = 5.0;
    CHECK_THROWS_AS(convergence_bound(p), DomainError);
}

TEST_CASE("dataset: validation and subsets")
{
    Dataset d;
    d.dim = 2;
    d.append(std::vector<double>{1, 2}, 0);
    d.append(std::vector<double>{3, 4}, 1);
    d.train = {0};
    d.test = {1};
    CHECK_NOTHROW(d.validate());
    d.test = {0};
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d.test = {};
    CHECK_THROWS_AS(d.validate(), ValidationError);
    const std::vector<std::size_t> rows{1};
    const auto s = subset(d, rows, Split::Validation);
    CHECK(s.rows() == 1);
    CHECK(s.validation == std::vector<std::size_t>{0});
    CHECK(s.labels[0] == 1.0);
}
