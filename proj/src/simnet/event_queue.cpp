#include "fedsim/simnet/event_queue.hpp"

#include "fedsim/errors.hpp"

#include <cmath>
#include <string>

namespace fedsim::simnet
{
    void VirtualClock::advance_to(VirtualTime t)
    {
        if (t < m_now)
        {
            throw CausalityViolation("clock cannot move back from " + std::to_string(m_now) + " to " +
                                     std::to_string(t));
        }
        m_now = t;
    }

    std::uint64_t EventQueue::insert(VirtualTime at, Item item)
    {
        const std::uint64_t seq = m_next_seq++;
        m_entries.emplace(std::make_pair(at, seq), std::move(item));
        return seq;
    }

    std::uint64_t EventQueue::schedule(const VirtualClock &clock, msgflow::Message msg)
    {
        if (!std::isfinite(msg.timestamp) || msg.timestamp < clock.now())
        {
            throw CausalityViolation("message '" + msg.msg_type + "' at t=" + std::to_string(msg.timestamp) +
                                     " scheduled when clock is at t=" + std::to_string(clock.now()));
        }
        const VirtualTime at = msg.timestamp;
        return insert(at, Item{std::move(msg)});
    }

    std::uint64_t EventQueue::schedule(const VirtualClock &clock, VirtualTime at, Timer timer)
    {
        if (!std::isfinite(at) || at < clock.now())
        {
            throw CausalityViolation("timer '" + timer.name + "' at t=" + std::to_string(at) +
                                     " scheduled when clock is at t=" + std::to_string(clock.now()));
        }
        return insert(at, Item{std::move(timer)});
    }

    QueueEntry EventQueue::next_event(VirtualClock &clock)
    {
        if (m_entries.empty())
        {
            throw QueueExhausted();
        }
        auto node = m_entries.extract(m_entries.begin());
        clock.advance_to(node.key().first);
        return QueueEntry{node.key().first, node.key().second, std::move(node.mapped())};
    }

    std::vector<QueueEntry> EventQueue::snapshot() const
    {
        std::vector<QueueEntry> out;
        out.reserve(m_entries.size());
        for (const auto &[key, item] : m_entries)
        {
            out.push_back(QueueEntry{key.first, key.second, item});
        }
        return out;
    }

    EventQueue EventQueue::restore(std::vector<QueueEntry> entries, std::uint64_t next_seq)
    {
        EventQueue q;
        q.m_next_seq = next_seq;
        for (auto &e : entries)
        {
            if (e.seq >= next_seq)
            {
                throw ValidationError("restored queue entry seq exceeds the sequence counter");
            }
            q.m_entries.emplace(std::make_pair(e.time, e.seq), std::move(e.item));
        }
        return q;
    }
} // namespace fedsim::simnet
