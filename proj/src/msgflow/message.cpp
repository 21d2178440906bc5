#include "fedsim/msgflow/message.hpp"

#include "fedsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fedsim::msgflow
{
    std::string EventKind::label() const
    {
        return is_message() ? "receiving_" + name : name;
    }

    void validate(const Message &m)
    {
        if (m.msg_type.empty())
        {
            throw ValidationError("message type must be non-empty");
        }
        if (!(m.timestamp >= 0.0) || !std::isfinite(m.timestamp))
        {
            throw ValidationError("message '" + m.msg_type + "' has invalid timestamp");
        }
        if (m.receivers.empty())
        {
            throw ValidationError("message '" + m.msg_type + "' has no receivers");
        }
        if (std::find(m.receivers.begin(), m.receivers.end(), m.sender) != m.receivers.end())
        {
            throw ValidationError("message '" + m.msg_type + "' is addressed to its own sender");
        }
    }

    Payload to_payload(const Message &m)
    {
        std::vector<double> receivers(m.receivers.begin(), m.receivers.end());
        Payload p;
        p.set("msg_type", m.msg_type)
            .set("sender", m.sender)
            .set("receivers", std::move(receivers))
            .set("timestamp", m.timestamp)
            .set("round", m.round)
            .set("payload", m.payload);
        return p;
    }

    Message message_from_payload(const Payload &p)
    {
        Message m;
        m.msg_type = p.text("msg_type");
        m.sender = p.integer("sender");
        for (double r : p.array("receivers"))
        {
            m.receivers.push_back(static_cast<ParticipantId>(r));
        }
        m.timestamp = p.real("timestamp");
        m.round = p.integer("round");
        m.payload = p.nested("payload");
        return m;
    }
} // namespace fedsim::msgflow
