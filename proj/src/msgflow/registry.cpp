#include "fedsim/msgflow/registry.hpp"

#include "fedsim/errors.hpp"

#include <spdlog/spdlog.h>

namespace fedsim::msgflow
{
    const char *to_string(Role r) noexcept
    {
        return r == Role::Server ? "server" : "client";
    }

    std::string OverwriteWarning::describe() const
    {
        return "handler '" + displaced + "' for event '" + event.label() + "' overwritten by '" + replacement + "'";
    }

    std::optional<OverwriteWarning> HandlerRegistry::register_handler(const EventKind &event, HandlerDecl decl)
    {
        if (decl.id.empty())
        {
            throw ValidationError("handler id must be non-empty");
        }
        if (event.name.empty())
        {
            throw ValidationError("event name must be non-empty");
        }
        for (const auto *set : {&decl.consumes, &decl.produces})
        {
            for (const auto &t : *set)
            {
                if (t.empty())
                {
                    throw ValidationError("handler '" + decl.id + "' declares an empty message type");
                }
            }
        }

        std::optional<OverwriteWarning> warning;
        if (auto it = m_bindings.find(event); it != m_bindings.end())
        {
            warning = OverwriteWarning{event, it->second.id, decl.id};
            spdlog::warn("{}", warning->describe());
            m_warnings.push_back(*warning);
        }
        m_log.push_back(LogEntry{event, decl.id});
        m_bindings.insert_or_assign(event, std::move(decl));
        return warning;
    }

    const HandlerDecl &HandlerRegistry::binding(const EventKind &event) const
    {
        auto it = m_bindings.find(event);
        if (it == m_bindings.end())
        {
            throw MissingHandler(event.label());
        }
        return it->second;
    }

    const std::string &HandlerRegistry::dispatch(const EventKind &event) const
    {
        return binding(event).id;
    }

    std::vector<std::string> HandlerRegistry::describe_bindings() const
    {
        std::vector<std::string> out;
        out.reserve(m_bindings.size());
        for (const auto &[event, decl] : m_bindings)
        {
            out.push_back(event.label() + " -> " + decl.id + " (" + to_string(decl.role) + ")");
        }
        return out;
    }
} // namespace fedsim::msgflow
