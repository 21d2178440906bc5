#include "fedsim/learnkit/model.hpp"

#include "fedsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fedsim::learnkit
{
    namespace
    {
        constexpr const char *kTheta = "theta";
        constexpr const char *kWeight = "weight";
        constexpr const char *kBias = "bias";
        constexpr const char *kHiddenWeight = "hidden.weight";
        constexpr const char *kHiddenBias = "hidden.bias";
        constexpr const char *kOutputWeight = "output.weight";
        constexpr const char *kOutputBias = "output.bias";

        // Per-row loss; fills dz with d(loss)/d(outputs).
        double output_loss(const ModelSpec &spec, std::span<const double> z, double label, std::vector<double> &dz)
        {
            dz.assign(z.size(), 0.0);
            if (spec.loss == LossKind::SquaredError)
            {
                const double r = z[0] - label;
                dz[0] = r;
                return 0.5 * r * r;
            }
            const auto y = static_cast<std::size_t>(label);
            if (y >= z.size())
            {
                throw ValidationError("class label out of range");
            }
            const double zmax = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (std::size_t k = 0; k < z.size(); ++k)
            {
                dz[k] = std::exp(z[k] - zmax);
                sum += dz[k];
            }
            for (auto &p : dz)
            {
                p /= sum;
            }
            dz[y] -= 1.0;
            return zmax + std::log(sum) - z[y];
        }

        // Computes outputs for one row; for the MLP also returns hidden activations.
        void forward(const ModelSpec &spec, const ParamVector &params, std::span<const double> x,
                     std::vector<double> &hidden, std::vector<double> &z)
        {
            const std::size_t d = spec.input_dim;
            const std::size_t k_out = spec.outputs();
            z.assign(k_out, 0.0);
            if (spec.kind == ModelKind::LogisticRegression)
            {
                const auto &w = params.group(kWeight);
                const auto &b = params.group(kBias);
                for (std::size_t k = 0; k < k_out; ++k)
                {
                    double s = b[k];
                    for (std::size_t j = 0; j < d; ++j)
                    {
                        s += w[k * d + j] * x[j];
                    }
                    z[k] = s;
                }
                return;
            }
            const std::size_t h_dim = spec.hidden;
            const auto &w1 = params.group(kHiddenWeight);
            const auto &b1 = params.group(kHiddenBias);
            const auto &w2 = params.group(kOutputWeight);
            const auto &b2 = params.group(kOutputBias);
            hidden.assign(h_dim, 0.0);
            for (std::size_t h = 0; h < h_dim; ++h)
            {
                double s = b1[h];
                for (std::size_t j = 0; j < d; ++j)
                {
                    s += w1[h * d + j] * x[j];
                }
                hidden[h] = std::tanh(s);
            }
            for (std::size_t k = 0; k < k_out; ++k)
            {
                double s = b2[k];
                for (std::size_t h = 0; h < h_dim; ++h)
                {
                    s += w2[k * h_dim + h] * hidden[h];
                }
                z[k] = s;
            }
        }

        double quadratic_row(const ModelSpec &spec, const ParamVector &params, std::span<const double> x,
                             std::vector<double> *grad)
        {
            const auto &theta = params.group(kTheta);
            double loss = 0.0;
            for (std::size_t j = 0; j < spec.input_dim; ++j)
            {
                const double h = spec.curvature_at(j);
                const double r = theta[j] - x[j];
                loss += 0.5 * h * r * r;
                if (grad != nullptr)
                {
                    (*grad)[j] += h * r;
                }
            }
            return loss;
        }

        std::vector<std::pair<const char *, std::size_t>> expected_shape(const ModelSpec &spec)
        {
            const std::size_t d = spec.input_dim;
            const std::size_t k = spec.outputs();
            switch (spec.kind)
            {
            case ModelKind::Quadratic:
                return {{kTheta, d}};
            case ModelKind::LogisticRegression:
                return {{kWeight, k * d}, {kBias, k}};
            default:
                return {{kHiddenWeight, spec.hidden * d},
                        {kHiddenBias, spec.hidden},
                        {kOutputWeight, k * spec.hidden},
                        {kOutputBias, k}};
            }
        }

        void check_shape(const ModelSpec &spec, const ParamVector &params)
        {
            const auto shape = expected_shape(spec);
            bool ok = shape.size() == params.num_groups();
            for (std::size_t i = 0; ok && i < shape.size(); ++i)
            {
                ok = params.groups()[i].name == shape[i].first && params.groups()[i].values.size() == shape[i].second;
            }
            if (!ok)
            {
                throw ShapeMismatch(std::string("parameters do not match the ") + to_string(spec.kind) + " model");
            }
        }
    } // namespace

    const char *to_string(ModelKind k) noexcept
    {
        switch (k)
        {
        case ModelKind::Quadratic:
            return "quadratic";
        case ModelKind::LogisticRegression:
            return "logistic";
        default:
            return "mlp";
        }
    }

    const char *to_string(LossKind k) noexcept
    {
        return k == LossKind::SquaredError ? "squared_error" : "logistic_ce";
    }

    ModelKind parse_model_kind(const std::string &s)
    {
        if (s == "quadratic")
        {
            return ModelKind::Quadratic;
        }
        if (s == "logistic")
        {
            return ModelKind::LogisticRegression;
        }
        if (s == "mlp")
        {
            return ModelKind::Mlp;
        }
        throw ValidationError("unknown model kind '" + s + "'");
    }

    LossKind parse_loss_kind(const std::string &s)
    {
        if (s == "squared_error")
        {
            return LossKind::SquaredError;
        }
        if (s == "logistic_ce")
        {
            return LossKind::LogisticCE;
        }
        throw ValidationError("unknown loss kind '" + s + "'");
    }

    void validate(const ModelSpec &spec)
    {
        if (spec.input_dim == 0)
        {
            throw ValidationError("model input dimension must be positive");
        }
        if (spec.kind == ModelKind::Quadratic)
        {
            if (spec.loss != LossKind::SquaredError)
            {
                throw ValidationError("quadratic model requires squared_error loss");
            }
            if (!spec.curvature.empty() && spec.curvature.size() != spec.input_dim)
            {
                throw ValidationError("quadratic curvature must have one entry per dimension");
            }
            for (double h : spec.curvature)
            {
                if (!(h > 0.0))
                {
                    throw ValidationError("quadratic curvature entries must be positive");
                }
            }
        }
        if (spec.loss == LossKind::LogisticCE && spec.num_classes < 2)
        {
            throw ValidationError("classification needs at least two classes");
        }
        if (spec.kind == ModelKind::Mlp && spec.hidden == 0)
        {
            throw ValidationError("mlp hidden size must be positive");
        }
    }

    ParamVector init_params(const ModelSpec &spec, simnet::SeededRng &rng)
    {
        validate(spec);
        const std::size_t d = spec.input_dim;
        const std::size_t k = spec.outputs();
        ParamVector p;
        switch (spec.kind)
        {
        case ModelKind::Quadratic:
            p.add_group(kTheta, std::vector<double>(d, 0.0));
            break;
        case ModelKind::LogisticRegression:
            p.add_group(kWeight, std::vector<double>(k * d, 0.0));
            p.add_group(kBias, std::vector<double>(k, 0.0));
            break;
        case ModelKind::Mlp:
        {
            std::vector<double> w1(spec.hidden * d);
            for (auto &w : w1)
            {
                w = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
            }
            std::vector<double> w2(k * spec.hidden);
            for (auto &w : w2)
            {
                w = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(spec.hidden)));
            }
            p.add_group(kHiddenWeight, std::move(w1));
            p.add_group(kHiddenBias, std::vector<double>(spec.hidden, 0.0));
            p.add_group(kOutputWeight, std::move(w2));
            p.add_group(kOutputBias, std::vector<double>(k, 0.0));
            break;
        }
        }
        return p;
    }

    LossGrad loss_and_grad(const ModelSpec &spec, const ParamVector &params, const Dataset &data,
                           std::span<const std::size_t> rows)
    {
        check_shape(spec, params);
        if (data.dim != spec.input_dim)
        {
            throw ShapeMismatch("dataset dimension does not match the model");
        }
        LossGrad out{0.0, params.zeros_like()};
        if (rows.empty())
        {
            return out;
        }
        const double inv_n = 1.0 / static_cast<double>(rows.size());

        if (spec.kind == ModelKind::Quadratic)
        {
            auto &g = out.grad.group(kTheta);
            for (std::size_t r : rows)
            {
                out.loss += quadratic_row(spec, params, data.row(r), &g);
            }
            out.loss *= inv_n;
            out.grad *= inv_n;
            return out;
        }

        const std::size_t d = spec.input_dim;
        const std::size_t k_out = spec.outputs();
        std::vector<double> hidden;
        std::vector<double> z;
        std::vector<double> dz;
        std::vector<double> dh;
        for (std::size_t r : rows)
        {
            const auto x = data.row(r);
            forward(spec, params, x, hidden, z);
            out.loss += output_loss(spec, z, data.labels[r], dz);

            if (spec.kind == ModelKind::LogisticRegression)
            {
                auto &gw = out.grad.group(kWeight);
                auto &gb = out.grad.group(kBias);
                for (std::size_t k = 0; k < k_out; ++k)
                {
                    gb[k] += dz[k];
                    for (std::size_t j = 0; j < d; ++j)
                    {
                        gw[k * d + j] += dz[k] * x[j];
                    }
                }
                continue;
            }

            const std::size_t h_dim = spec.hidden;
            const auto &w2 = params.group(kOutputWeight);
            auto &gw1 = out.grad.group(kHiddenWeight);
            auto &gb1 = out.grad.group(kHiddenBias);
            auto &gw2 = out.grad.group(kOutputWeight);
            auto &gb2 = out.grad.group(kOutputBias);
            dh.assign(h_dim, 0.0);
            for (std::size_t k = 0; k < k_out; ++k)
            {
                gb2[k] += dz[k];
                for (std::size_t h = 0; h < h_dim; ++h)
                {
                    gw2[k * h_dim + h] += dz[k] * hidden[h];
                    dh[h] += w2[k * h_dim + h] * dz[k];
                }
            }
            for (std::size_t h = 0; h < h_dim; ++h)
            {
                const double da = dh[h] * (1.0 - hidden[h] * hidden[h]);
                gb1[h] += da;
                for (std::size_t j = 0; j < d; ++j)
                {
                    gw1[h * d + j] += da * x[j];
                }
            }
        }
        out.loss *= inv_n;
        out.grad *= inv_n;
        return out;
    }

    double mean_loss(const ModelSpec &spec, const ParamVector &params, const Dataset &data,
                     std::span<const std::size_t> rows)
    {
        check_shape(spec, params);
        if (rows.empty())
        {
            return 0.0;
        }
        double total = 0.0;
        std::vector<double> hidden;
        std::vector<double> z;
        std::vector<double> dz;
        for (std::size_t r : rows)
        {
            if (spec.kind == ModelKind::Quadratic)
            {
                total += quadratic_row(spec, params, data.row(r), nullptr);
                continue;
            }
            forward(spec, params, data.row(r), hidden, z);
            total += output_loss(spec, z, data.labels[r], dz);
        }
        return total / static_cast<double>(rows.size());
    }

    EvalResult evaluate(const ModelSpec &spec, const ParamVector &params, const Dataset &data, Split split)
    {
        const auto &rows = data.split(split);
        if (rows.empty())
        {
            throw EmptyEvaluation();
        }
        check_shape(spec, params);
        EvalResult out;
        out.count = rows.size();
        std::vector<double> hidden;
        std::vector<double> z;
        std::vector<double> dz;
        std::size_t correct = 0;
        double total = 0.0;
        for (std::size_t r : rows)
        {
            if (spec.kind == ModelKind::Quadratic)
            {
                total += quadratic_row(spec, params, data.row(r), nullptr);
                continue;
            }
            forward(spec, params, data.row(r), hidden, z);
            total += output_loss(spec, z, data.labels[r], dz);
            if (spec.classification())
            {
                const auto pred = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
                if (pred == static_cast<std::size_t>(data.labels[r]))
                {
                    ++correct;
                }
            }
        }
        out.loss = total / static_cast<double>(rows.size());
        if (spec.classification() && spec.kind != ModelKind::Quadratic)
        {
            out.accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
        }
        return out;
    }
} // namespace fedsim::learnkit
