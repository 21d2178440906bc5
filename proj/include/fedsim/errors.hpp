#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedsim
{
    // Root of every error thrown by the simulator. Callers that only need to
    // report a failure can catch this; the derived types carry the detail.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class ValidationError : public Error
    {
    public:
        using Error::Error;
    };

    class MissingHandler : public Error
    {
    public:
        explicit MissingHandler(std::string event)
            : Error("no handler bound to event '" + event + "'"), m_event(std::move(event))
        {
        }
        const std::string &event() const noexcept { return m_event; }

    private:
        std::string m_event;
    };

    class DecodeError : public Error
    {
    public:
        DecodeError(std::size_t offset, const std::string &what)
            : Error("decode error at byte " + std::to_string(offset) + ": " + what), m_offset(offset)
        {
        }
        std::size_t offset() const noexcept { return m_offset; }

    private:
        std::size_t m_offset;
    };

    class CausalityViolation : public Error
    {
    public:
        using Error::Error;
    };

    class QueueExhausted : public Error
    {
    public:
        QueueExhausted() : Error("event queue exhausted") {}
    };

    class InsufficientClients : public Error
    {
    public:
        InsufficientClients(std::size_t requested, std::size_t available)
            : Error("requested " + std::to_string(requested) + " clients but only " + std::to_string(available) +
                    " are idle"),
              m_requested(requested), m_available(available)
        {
        }
        std::size_t requested() const noexcept { return m_requested; }
        std::size_t available() const noexcept { return m_available; }

    private:
        std::size_t m_requested;
        std::size_t m_available;
    };

    class ProtocolError : public Error
    {
    public:
        using Error::Error;
    };

    class CourseStalled : public Error
    {
    public:
        using Error::Error;
    };

    // The handler graph has no start-to-termination path.
    class IncompleteCourse : public Error
    {
    public:
        using Error::Error;
    };

    class NumericalError : public Error
    {
    public:
        NumericalError(int step, const std::string &what)
            : Error("non-finite value at local step " + std::to_string(step) + ": " + what), m_step(step)
        {
        }
        int step() const noexcept { return m_step; }

    private:
        int m_step;
    };

    class EmptyAggregation : public Error
    {
    public:
        EmptyAggregation() : Error("aggregation weights sum to zero") {}
    };

    class InsufficientUpdates : public Error
    {
    public:
        using Error::Error;
    };

    class ShapeMismatch : public Error
    {
    public:
        using Error::Error;
    };

    class ConfigError : public Error
    {
    public:
        ConfigError(std::string key, const std::string &what, int line = -1)
            : Error(format(key, what, line)), m_key(std::move(key)), m_reason(what), m_line(line)
        {
        }
        const std::string &key() const noexcept { return m_key; }
        const std::string &reason() const noexcept { return m_reason; }
        int line() const noexcept { return m_line; }

    private:
        static std::string format(const std::string &key, const std::string &what, int line)
        {
            std::string msg = "config key '" + key + "'";
            if (line > 0)
            {
                msg += " (line " + std::to_string(line) + ")";
            }
            return msg + ": " + what;
        }

        std::string m_key;
        std::string m_reason;
        int m_line;
    };

    class DomainError : public Error
    {
    public:
        using Error::Error;
    };

    class EmptyEvaluation : public Error
    {
    public:
        EmptyEvaluation() : Error("evaluation split is empty") {}
    };

    class PartitionError : public Error
    {
    public:
        using Error::Error;
    };

    class SearchFailed : public Error
    {
    public:
        using Error::Error;
    };
} // namespace fedsim
