#include "fedsim/msgflow/payload.hpp"

#include "fedsim/errors.hpp"

#include <bit>
#include <cstring>

namespace fedsim::msgflow
{
    namespace
    {
        std::uint64_t bits(double v)
        {
            return std::bit_cast<std::uint64_t>(v);
        }

        bool same_value(const Value &a, const Value &b)
        {
            if (a.index() != b.index())
            {
                return false;
            }
            switch (a.index())
            {
            case 0:
                return bits(std::get<double>(a)) == bits(std::get<double>(b));
            case 1:
                return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
            case 2:
                return std::get<std::string>(a) == std::get<std::string>(b);
            case 3:
            {
                const auto &x = std::get<std::vector<double>>(a);
                const auto &y = std::get<std::vector<double>>(b);
                return x.size() == y.size() &&
                       (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
            }
            default:
            {
                const auto &x = std::get<Nested>(a).value;
                const auto &y = std::get<Nested>(b).value;
                if (!x || !y)
                {
                    return !x && !y;
                }
                return *x == *y;
            }
            }
        }

        template <typename T>
        const T &typed(const Payload &p, std::string_view name, const char *type)
        {
            const Value *v = p.find(name);
            if (v == nullptr)
            {
                throw ValidationError("payload has no entry '" + std::string(name) + "'");
            }
            const T *t = std::get_if<T>(v);
            if (t == nullptr)
            {
                throw ValidationError("payload entry '" + std::string(name) + "' is not " + type);
            }
            return *t;
        }
    } // namespace

    Payload &Payload::put(std::string name, Value v)
    {
        if (name.empty())
        {
            throw ValidationError("payload entry name must be non-empty");
        }
        if (contains(name))
        {
            throw ValidationError("duplicate payload entry '" + name + "'");
        }
        if (const auto *n = std::get_if<Nested>(&v); n != nullptr && !n->value)
        {
            throw ValidationError("nested payload entry '" + name + "' is null");
        }
        m_entries.push_back(Entry{std::move(name), std::move(v)});
        return *this;
    }

    const Value *Payload::find(std::string_view name) const noexcept
    {
        for (const auto &e : m_entries)
        {
            if (e.name == name)
            {
                return &e.value;
            }
        }
        return nullptr;
    }

    double Payload::real(std::string_view name) const { return typed<double>(*this, name, "a real"); }

    std::int64_t Payload::integer(std::string_view name) const
    {
        return typed<std::int64_t>(*this, name, "an integer");
    }

    const std::string &Payload::text(std::string_view name) const
    {
        return typed<std::string>(*this, name, "a string");
    }

    const std::vector<double> &Payload::array(std::string_view name) const
    {
        return typed<std::vector<double>>(*this, name, "an array");
    }

    const Payload &Payload::nested(std::string_view name) const
    {
        return *typed<Nested>(*this, name, "a nested payload").value;
    }

    bool operator==(const Payload &a, const Payload &b)
    {
        if (a.m_entries.size() != b.m_entries.size())
        {
            return false;
        }
        for (std::size_t i = 0; i < a.m_entries.size(); ++i)
        {
            if (a.m_entries[i].name != b.m_entries[i].name ||
                !same_value(a.m_entries[i].value, b.m_entries[i].value))
            {
                return false;
            }
        }
        return true;
    }
} // namespace fedsim::msgflow
