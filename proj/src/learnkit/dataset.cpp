#include "fedsim/learnkit/dataset.hpp"

#include "fedsim/errors.hpp"

namespace fedsim::learnkit
{
    const std::vector<std::size_t> &Dataset::split(Split s) const noexcept
    {
        switch (s)
        {
        case Split::Train:
            return train;
        case Split::Validation:
            return validation;
        default:
            return test;
        }
    }

    void Dataset::append(std::span<const double> x, double y)
    {
        if (x.size() != dim)
        {
            throw ShapeMismatch("feature row has wrong dimension");
        }
        features.insert(features.end(), x.begin(), x.end());
        labels.push_back(y);
    }

    void Dataset::validate() const
    {
        if (features.size() != rows() * dim)
        {
            throw ValidationError("feature matrix size does not match rows * dim");
        }
        std::vector<char> seen(rows(), 0);
        for (const auto *s : {&train, &validation, &test})
        {
            for (std::size_t i : *s)
            {
                if (i >= rows() || seen[i])
                {
                    throw ValidationError("dataset splits overlap or index out of range");
                }
                seen[i] = 1;
            }
        }
        for (char c : seen)
        {
            if (!c)
            {
                throw ValidationError("dataset splits do not cover every row");
            }
        }
    }

    Dataset subset(const Dataset &source, std::span<const std::size_t> rows, Split into)
    {
        Dataset out;
        out.dim = source.dim;
        out.features.reserve(rows.size() * source.dim);
        out.labels.reserve(rows.size());
        for (std::size_t r : rows)
        {
            out.append(source.row(r), source.labels.at(r));
        }
        std::vector<std::size_t> all(rows.size());
        for (std::size_t i = 0; i < all.size(); ++i)
        {
            all[i] = i;
        }
        switch (into)
        {
        case Split::Train:
            out.train = std::move(all);
            break;
        case Split::Validation:
            out.validation = std::move(all);
            break;
        case Split::Test:
            out.test = std::move(all);
            break;
        }
        return out;
    }
} // namespace fedsim::learnkit
