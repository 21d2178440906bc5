#include "fedsim/learnkit/param_vector.hpp"

#include "fedsim/errors.hpp"

#include <cmath>

namespace fedsim::learnkit
{
    ParamVector &ParamVector::add_group(std::string name, std::vector<double> values)
    {
        if (name.empty() || has_group(name))
        {
            throw ValidationError("parameter group name '" + name + "' is empty or duplicated");
        }
        m_groups.push_back(ParamGroup{std::move(name), std::move(values)});
        return *this;
    }

    bool ParamVector::has_group(std::string_view name) const noexcept
    {
        for (const auto &g : m_groups)
        {
            if (g.name == name)
            {
                return true;
            }
        }
        return false;
    }

    const std::vector<double> &ParamVector::group(std::string_view name) const
    {
        for (const auto &g : m_groups)
        {
            if (g.name == name)
            {
                return g.values;
            }
        }
        throw ShapeMismatch("no parameter group '" + std::string(name) + "'");
    }

    std::vector<double> &ParamVector::group(std::string_view name)
    {
        return const_cast<std::vector<double> &>(static_cast<const ParamVector &>(*this).group(name));
    }

    std::vector<std::string> ParamVector::group_names() const
    {
        std::vector<std::string> names;
        for (const auto &g : m_groups)
        {
            names.push_back(g.name);
        }
        return names;
    }

    std::size_t ParamVector::total_size() const noexcept
    {
        std::size_t n = 0;
        for (const auto &g : m_groups)
        {
            n += g.values.size();
        }
        return n;
    }

    bool ParamVector::same_shape(const ParamVector &o) const noexcept
    {
        if (m_groups.size() != o.m_groups.size())
        {
            return false;
        }
        for (std::size_t i = 0; i < m_groups.size(); ++i)
        {
            if (m_groups[i].name != o.m_groups[i].name || m_groups[i].values.size() != o.m_groups[i].values.size())
            {
                return false;
            }
        }
        return true;
    }

    void ParamVector::require_same_shape(const ParamVector &o) const
    {
        if (!same_shape(o))
        {
            throw ShapeMismatch("parameter vectors have different shapes");
        }
    }

    ParamVector ParamVector::zeros_like() const
    {
        ParamVector z;
        for (const auto &g : m_groups)
        {
            z.m_groups.push_back(ParamGroup{g.name, std::vector<double>(g.values.size(), 0.0)});
        }
        return z;
    }

    std::vector<double> ParamVector::flatten() const
    {
        std::vector<double> out;
        out.reserve(total_size());
        for (const auto &g : m_groups)
        {
            out.insert(out.end(), g.values.begin(), g.values.end());
        }
        return out;
    }

    ParamVector &ParamVector::operator+=(const ParamVector &o) { return axpy(1.0, o); }

    ParamVector &ParamVector::operator-=(const ParamVector &o) { return axpy(-1.0, o); }

    ParamVector &ParamVector::operator*=(double s)
    {
        for (auto &g : m_groups)
        {
            for (auto &v : g.values)
            {
                v *= s;
            }
        }
        return *this;
    }

    ParamVector &ParamVector::axpy(double a, const ParamVector &x)
    {
        require_same_shape(x);
        for (std::size_t i = 0; i < m_groups.size(); ++i)
        {
            auto &dst = m_groups[i].values;
            const auto &src = x.m_groups[i].values;
            for (std::size_t j = 0; j < dst.size(); ++j)
            {
                dst[j] += a * src[j];
            }
        }
        return *this;
    }

    bool ParamVector::all_finite() const noexcept
    {
        for (const auto &g : m_groups)
        {
            for (double v : g.values)
            {
                if (!std::isfinite(v))
                {
                    return false;
                }
            }
        }
        return true;
    }

    ParamVector operator+(ParamVector a, const ParamVector &b) { return a += b; }

    ParamVector operator-(ParamVector a, const ParamVector &b) { return a -= b; }

    ParamVector operator*(double s, ParamVector a) { return a *= s; }

    double dot(const ParamVector &a, const ParamVector &b)
    {
        if (!a.same_shape(b))
        {
            throw ShapeMismatch("parameter vectors have different shapes");
        }
        double s = 0.0;
        for (std::size_t i = 0; i < a.groups().size(); ++i)
        {
            const auto &x = a.groups()[i].values;
            const auto &y = b.groups()[i].values;
            for (std::size_t j = 0; j < x.size(); ++j)
            {
                s += x[j] * y[j];
            }
        }
        return s;
    }

    double squared_norm(const ParamVector &a) { return dot(a, a); }

    double squared_distance(const ParamVector &a, const ParamVector &b)
    {
        if (!a.same_shape(b))
        {
            throw ShapeMismatch("parameter vectors have different shapes");
        }
        double s = 0.0;
        for (std::size_t i = 0; i < a.groups().size(); ++i)
        {
            const auto &x = a.groups()[i].values;
            const auto &y = b.groups()[i].values;
            for (std::size_t j = 0; j < x.size(); ++j)
            {
                const double d = x[j] - y[j];
                s += d * d;
            }
        }
        return s;
    }

    ParamVector filter_shared(const ParamVector &params, const std::set<std::string> &share_list)
    {
        if (share_list.empty())
        {
            throw ConfigError("trainer.share_list", "must name at least one parameter group");
        }
        for (const auto &name : share_list)
        {
            if (!params.has_group(name))
            {
                throw ConfigError("trainer.share_list", "unknown parameter group '" + name + "'");
            }
        }
        ParamVector out;
        for (const auto &g : params.groups())
        {
            if (share_list.contains(g.name))
            {
                out.add_group(g.name, g.values);
            }
        }
        return out;
    }

    ParamVector merge_shared(const ParamVector &full, const ParamVector &shared)
    {
        ParamVector out = full;
        for (const auto &g : shared.groups())
        {
            auto &dst = out.group(g.name);
            if (dst.size() != g.values.size())
            {
                throw ShapeMismatch("shared group '" + g.name + "' has a different length");
            }
            dst = g.values;
        }
        return out;
    }

    msgflow::Payload to_payload(const ParamVector &p)
    {
        msgflow::Payload out;
        for (const auto &g : p.groups())
        {
            out.set(g.name, g.values);
        }
        return out;
    }

    ParamVector params_from_payload(const msgflow::Payload &p)
    {
        ParamVector out;
        for (const auto &e : p.entries())
        {
            const auto *values = std::get_if<std::vector<double>>(&e.value);
            if (values == nullptr)
            {
                throw ValidationError("parameter payload entry '" + e.name + "' is not an array");
            }
            out.add_group(e.name, *values);
        }
        return out;
    }
} // namespace fedsim::learnkit
