#pragma once

#include "fedsim/msgflow/message.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fedsim::simnet
{
    class VirtualClock
    {
    public:
        VirtualTime now() const noexcept { return m_now; }
        // Throws CausalityViolation when t < now.
        void advance_to(VirtualTime t);

    private:
        VirtualTime m_now = 0.0;
    };

    // Participant-local wake-up that backs time-based condition checks. Never
    // crosses the simulated network.
    struct Timer
    {
        std::string name;
        ParticipantId owner = kServerId;
        std::int64_t round = 0;
        std::int64_t generation = 0;
    };

    using Item = std::variant<msgflow::Message, Timer>;

    struct QueueEntry
    {
        VirtualTime time = 0.0;
        std::uint64_t seq = 0;
        Item item;
    };

    // Pops in strict (time, seq) order; seq is assigned at schedule time, so
    // equal timestamps pop in scheduling order.
    class EventQueue
    {
    public:
        // Returns the assigned seq. Throws CausalityViolation when the item is
        // timestamped before clock.now().
        std::uint64_t schedule(const VirtualClock &clock, msgflow::Message msg);
        std::uint64_t schedule(const VirtualClock &clock, VirtualTime at, Timer timer);

        // Removes the minimum entry and advances the clock to its time.
        // Throws QueueExhausted when empty.
        QueueEntry next_event(VirtualClock &clock);

        bool empty() const noexcept { return m_entries.empty(); }
        std::size_t size() const noexcept { return m_entries.size(); }
        std::uint64_t next_seq() const noexcept { return m_next_seq; }
        std::uint64_t scheduled_total() const noexcept { return m_next_seq; }

        // Snapshot in pop order, and the inverse used by checkpoint restore.
        std::vector<QueueEntry> snapshot() const;
        static EventQueue restore(std::vector<QueueEntry> entries, std::uint64_t next_seq);

    private:
        std::uint64_t insert(VirtualTime at, Item item);

        std::map<std::pair<VirtualTime, std::uint64_t>, Item> m_entries;
        std::uint64_t m_next_seq = 0;
    };
} // namespace fedsim::simnet
