#pragma once

#include "fedsim/msgflow/payload.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace fedsim
{
    // Participant 0 is the server; clients are numbered from 1.
    using ParticipantId = std::int64_t;
    inline constexpr ParticipantId kServerId = 0;

    // Abstract virtual seconds.
    using VirtualTime = double;
} // namespace fedsim

namespace fedsim::msgflow
{
    // Well-known message types of the built-in courses.
    namespace msg
    {
        inline constexpr const char *kJoinIn = "join_in";
        inline constexpr const char *kModelParam = "model_param";
        inline constexpr const char *kModelUpdate = "model_update";
        inline constexpr const char *kFinish = "finish";
    } // namespace msg

    // Well-known condition-check events.
    namespace cond
    {
        inline constexpr const char *kStart = "start";
        inline constexpr const char *kAllJoinedIn = "all_joined_in";
        inline constexpr const char *kAllReceived = "all_received";
        inline constexpr const char *kGoalAchieved = "goal_achieved";
        inline constexpr const char *kTimeUp = "time_up";
        inline constexpr const char *kEarlyStop = "early_stop";
        inline constexpr const char *kMaxRoundsReached = "max_rounds_reached";
    } // namespace cond

    struct EventKind
    {
        enum class Class : std::uint8_t
        {
            MessagePassing,
            ConditionCheck,
        };

        Class kind = Class::MessagePassing;
        std::string name;

        static EventKind message(std::string msg_type) { return {Class::MessagePassing, std::move(msg_type)}; }
        static EventKind condition(std::string name) { return {Class::ConditionCheck, std::move(name)}; }

        bool is_message() const noexcept { return kind == Class::MessagePassing; }

        // "receiving_<msg_type>" for message events, the bare name for conditions.
        std::string label() const;

        auto operator<=>(const EventKind &) const = default;
    };

    struct Message
    {
        std::string msg_type;
        ParticipantId sender = kServerId;
        std::vector<ParticipantId> receivers;
        VirtualTime timestamp = 0.0;
        // Model version the message refers to; -1 when not applicable.
        std::int64_t round = -1;
        Payload payload;
    };

    // Checks timestamp >= 0, non-empty type and receivers, and that the sender
    // is not among the receivers. Throws ValidationError.
    void validate(const Message &m);

    // Header fields plus payload, as one canonical payload (used by checkpoints).
    Payload to_payload(const Message &m);
    Message message_from_payload(const Payload &p);
} // namespace fedsim::msgflow
