#include "fedsim/learnkit/trainer.hpp"

#include "fedsim/errors.hpp"

#include <cmath>

namespace fedsim::learnkit
{
    namespace
    {
        // One minibatch (or full batch) of row indices from the train split.
        std::vector<std::size_t> draw_batch(const Dataset &data, std::size_t batch_size, simnet::SeededRng &rng)
        {
            if (batch_size == 0)
            {
                return data.train;
            }
            std::vector<std::size_t> rows(batch_size);
            for (auto &r : rows)
            {
                r = data.train[rng.index(data.train.size())];
            }
            return rows;
        }

        // Runs SGD from `start`; `prox_center`, when set, adds lambda/2 ||v - center||^2.
        ParamVector run_sgd(const ParamVector &start, const Dataset &data, const TrainerConfig &cfg,
                            simnet::SeededRng &rng, const ParamVector *prox_center, double lambda)
        {
            if (data.train.empty())
            {
                throw EmptyEvaluation();
            }
            ParamVector v = start;
            for (int step = 1; step <= cfg.local_steps; ++step)
            {
                const auto rows = draw_batch(data, cfg.batch_size, rng);
                LossGrad lg = loss_and_grad(cfg.model, v, data, rows);
                if (prox_center != nullptr && lambda > 0.0)
                {
                    lg.grad.axpy(lambda, v);
                    lg.grad.axpy(-lambda, *prox_center);
                }
                if (!std::isfinite(lg.loss))
                {
                    throw NumericalError(step, "loss");
                }
                if (!lg.grad.all_finite())
                {
                    throw NumericalError(step, "gradient");
                }
                v.axpy(-cfg.learning_rate, lg.grad);
            }
            return v;
        }
    } // namespace

    void validate(const TrainerConfig &cfg)
    {
        validate(cfg.model);
        if (cfg.local_steps < 1)
        {
            throw ValidationError("local_steps must be at least 1");
        }
        if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        {
            throw ValidationError("learning_rate must be positive");
        }
        if (cfg.ditto_lambda && !(*cfg.ditto_lambda >= 0.0))
        {
            throw ValidationError("ditto_lambda must be non-negative");
        }
        if (cfg.dp_sigma && !(*cfg.dp_sigma >= 0.0))
        {
            throw ValidationError("dp_sigma must be non-negative");
        }
        if (!cfg.share_list.empty())
        {
            simnet::SeededRng rng(0, {});
            const ParamVector shape = init_params(cfg.model, rng);
            for (const auto &g : cfg.share_list)
            {
                if (!shape.has_group(g))
                {
                    throw ValidationError("share_list names unknown group '" + g + "'");
                }
            }
        }
    }

    ParamVector local_train_sgd(const ParamVector &params, const Dataset &data, const TrainerConfig &cfg,
                                simnet::SeededRng &rng)
    {
        ParamVector after = run_sgd(params, data, cfg, rng, nullptr, 0.0);
        after -= params;
        return after;
    }

    DittoResult local_train_ditto(const ParamVector &global, const ParamVector &local, const Dataset &data,
                                  const TrainerConfig &cfg, simnet::SeededRng &rng)
    {
        if (!cfg.ditto_lambda)
        {
            throw ValidationError("ditto training needs ditto_lambda");
        }
        DittoResult out;
        out.shared_delta = local_train_sgd(global, data, cfg, rng);
        out.new_local = run_sgd(local, data, cfg, rng, &global, *cfg.ditto_lambda);
        return out;
    }
} // namespace fedsim::learnkit
