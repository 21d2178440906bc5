#pragma once

#include "fedsim/learnkit/dataset.hpp"
#include "fedsim/learnkit/param_vector.hpp"
#include "fedsim/simnet/rng.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fedsim::learnkit
{
    enum class ModelKind
    {
        // Per-row loss 0.5 * sum_j h_j (theta_j - x_j)^2; labels are ignored.
        Quadratic,
        // Linear model: softmax over classes (LogisticCE) or a scalar output (SquaredError).
        LogisticRegression,
        // One tanh hidden layer followed by a linear output layer.
        Mlp,
    };

    enum class LossKind
    {
        SquaredError,
        LogisticCE,
    };

    const char *to_string(ModelKind k) noexcept;
    const char *to_string(LossKind k) noexcept;
    ModelKind parse_model_kind(const std::string &s);
    LossKind parse_loss_kind(const std::string &s);

    struct ModelSpec
    {
        ModelKind kind = ModelKind::LogisticRegression;
        LossKind loss = LossKind::LogisticCE;
        std::size_t input_dim = 1;
        std::size_t num_classes = 2;
        std::size_t hidden = 16;
        // Quadratic only; empty means all ones.
        std::vector<double> curvature;

        std::size_t outputs() const noexcept { return loss == LossKind::LogisticCE ? num_classes : 1; }
        double curvature_at(std::size_t j) const { return curvature.empty() ? 1.0 : curvature.at(j); }
        bool classification() const noexcept { return loss == LossKind::LogisticCE; }
    };

    // Throws ValidationError for unsupported kind/loss combinations or bad sizes.
    void validate(const ModelSpec &spec);

    // Zero weights for convex models; small Gaussian weights for the MLP.
    ParamVector init_params(const ModelSpec &spec, simnet::SeededRng &rng);

    struct LossGrad
    {
        double loss = 0.0;
        ParamVector grad;
    };

    // Mean loss and its gradient over `rows`.
    LossGrad loss_and_grad(const ModelSpec &spec, const ParamVector &params, const Dataset &data,
                           std::span<const std::size_t> rows);
    double mean_loss(const ModelSpec &spec, const ParamVector &params, const Dataset &data,
                     std::span<const std::size_t> rows);

    struct EvalResult
    {
        double loss = 0.0;
        std::optional<double> accuracy;
        std::size_t count = 0;
    };

    // Throws EmptyEvaluation when the split has no rows.
    EvalResult evaluate(const ModelSpec &spec, const ParamVector &params, const Dataset &data, Split split);
} // namespace fedsim::learnkit
