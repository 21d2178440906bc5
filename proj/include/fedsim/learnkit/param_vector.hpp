#pragma once

#include "fedsim/msgflow/payload.hpp"

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedsim::learnkit
{
    struct ParamGroup
    {
        std::string name;
        std::vector<double> values;

        bool operator==(const ParamGroup &) const = default;
    };

    // Named groups of flat arrays. Arithmetic is only defined between vectors
    // with the same group names, order and lengths; anything else throws
    // ShapeMismatch.
    class ParamVector
    {
    public:
        ParamVector() = default;

        ParamVector &add_group(std::string name, std::vector<double> values);

        const std::vector<ParamGroup> &groups() const noexcept { return m_groups; }
        std::vector<ParamGroup> &groups() noexcept { return m_groups; }

        bool has_group(std::string_view name) const noexcept;
        const std::vector<double> &group(std::string_view name) const;
        std::vector<double> &group(std::string_view name);
        std::vector<std::string> group_names() const;

        std::size_t num_groups() const noexcept { return m_groups.size(); }
        std::size_t total_size() const noexcept;
        bool same_shape(const ParamVector &other) const noexcept;

        ParamVector zeros_like() const;
        std::vector<double> flatten() const;

        ParamVector &operator+=(const ParamVector &o);
        ParamVector &operator-=(const ParamVector &o);
        ParamVector &operator*=(double s);
        // this += a * x
        ParamVector &axpy(double a, const ParamVector &x);

        bool all_finite() const noexcept;

        bool operator==(const ParamVector &) const = default;

    private:
        void require_same_shape(const ParamVector &o) const;

        std::vector<ParamGroup> m_groups;
    };

    ParamVector operator+(ParamVector a, const ParamVector &b);
    ParamVector operator-(ParamVector a, const ParamVector &b);
    ParamVector operator*(double s, ParamVector a);

    double dot(const ParamVector &a, const ParamVector &b);
    double squared_norm(const ParamVector &a);
    double squared_distance(const ParamVector &a, const ParamVector &b);

    // Shared-subset selection for partial model sharing. filter_shared throws
    // ConfigError for an empty share list or an unknown group name.
    ParamVector filter_shared(const ParamVector &params, const std::set<std::string> &share_list);
    // Replaces the groups present in `shared` and leaves the rest of `full` untouched.
    ParamVector merge_shared(const ParamVector &full, const ParamVector &shared);

    msgflow::Payload to_payload(const ParamVector &p);
    ParamVector params_from_payload(const msgflow::Payload &p);
} // namespace fedsim::learnkit
