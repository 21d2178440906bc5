#pragma once

#include "fedsim/msgflow/message.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fedsim::msgflow
{
    enum class Role : std::uint8_t
    {
        Server,
        Client,
    };

    const char *to_string(Role r) noexcept;

    // Static I/O declaration of a handler. `consumes` lists the message types
    // whose arrival can lead to this handler running (directly or through a
    // condition it watches); `produces` lists the message types it can send.
    struct HandlerDecl
    {
        std::string id;
        std::set<std::string> consumes;
        std::set<std::string> produces;
        Role role = Role::Server;

        bool operator==(const HandlerDecl &) const = default;
    };

    struct OverwriteWarning
    {
        EventKind event;
        std::string displaced;
        std::string replacement;

        std::string describe() const;
    };

    // One effective handler per event. The latest registration for an event
    // replaces the earlier one and reports the displaced handler.
    class HandlerRegistry
    {
    public:
        struct LogEntry
        {
            EventKind event;
            std::string handler_id;
        };

        std::optional<OverwriteWarning> register_handler(const EventKind &event, HandlerDecl decl);

        // Throws MissingHandler naming the event label when unbound.
        const std::string &dispatch(const EventKind &event) const;
        const HandlerDecl &binding(const EventKind &event) const;
        bool bound(const EventKind &event) const noexcept { return m_bindings.contains(event); }

        const std::map<EventKind, HandlerDecl> &bindings() const noexcept { return m_bindings; }
        const std::vector<LogEntry> &registration_log() const noexcept { return m_log; }
        const std::vector<OverwriteWarning> &warnings() const noexcept { return m_warnings; }

        // "event -> handler" lines in event order, for the run log.
        std::vector<std::string> describe_bindings() const;

    private:
        std::map<EventKind, HandlerDecl> m_bindings;
        std::vector<LogEntry> m_log;
        std::vector<OverwriteWarning> m_warnings;
    };
} // namespace fedsim::msgflow
