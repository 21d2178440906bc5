#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedsim::learnkit
{
    enum class Split
    {
        Train,
        Validation,
        Test,
    };

    // n x dim row-major features with one label per row. Labels hold class
    // indices for classification and targets for regression.
    struct Dataset
    {
        std::size_t dim = 0;
        std::vector<double> features;
        std::vector<double> labels;
        std::vector<std::size_t> train;
        std::vector<std::size_t> validation;
        std::vector<std::size_t> test;

        std::size_t rows() const noexcept { return labels.size(); }
        std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
        const std::vector<std::size_t> &split(Split s) const noexcept;

        void append(std::span<const double> x, double y);

        // Throws ValidationError unless features are n*dim and the splits are
        // disjoint and cover every row.
        void validate() const;
    };

    // Every row in the given split; the other splits are empty.
    Dataset subset(const Dataset &source, std::span<const std::size_t> rows, Split into);
} // namespace fedsim::learnkit
