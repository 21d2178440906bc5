#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace fedsim::msgflow
{
    class Payload;

    // Nested payloads are boxed so Value stays a regular value type.
    struct Nested
    {
        std::shared_ptr<const Payload> value;
    };

    using Value = std::variant<double, std::int64_t, std::string, std::vector<double>, Nested>;

    // Ordered (name, value) entries. Names are unique within one level and
    // entry order is the canonical wire order.
    class Payload
    {
    public:
        struct Entry
        {
            std::string name;
            Value value;
        };

        Payload() = default;

        Payload &set(std::string name, double v) { return put(std::move(name), Value{v}); }
        Payload &set(std::string name, std::int64_t v) { return put(std::move(name), Value{v}); }
        Payload &set(std::string name, int v) { return put(std::move(name), Value{static_cast<std::int64_t>(v)}); }
        Payload &set(std::string name, std::uint64_t v)
        {
            return put(std::move(name), Value{static_cast<std::int64_t>(v)});
        }
        Payload &set(std::string name, std::string v) { return put(std::move(name), Value{std::move(v)}); }
        Payload &set(std::string name, const char *v) { return put(std::move(name), Value{std::string(v)}); }
        Payload &set(std::string name, std::vector<double> v) { return put(std::move(name), Value{std::move(v)}); }
        Payload &set(std::string name, Payload v)
        {
            return put(std::move(name), Value{Nested{std::make_shared<const Payload>(std::move(v))}});
        }

        // Appends an entry; throws ValidationError on a duplicate name.
        Payload &put(std::string name, Value v);

        bool contains(std::string_view name) const noexcept { return find(name) != nullptr; }
        const Value *find(std::string_view name) const noexcept;

        // Typed accessors throw ValidationError when the entry is absent or has another type.
        double real(std::string_view name) const;
        std::int64_t integer(std::string_view name) const;
        const std::string &text(std::string_view name) const;
        const std::vector<double> &array(std::string_view name) const;
        const Payload &nested(std::string_view name) const;

        const std::vector<Entry> &entries() const noexcept { return m_entries; }
        std::size_t size() const noexcept { return m_entries.size(); }
        bool empty() const noexcept { return m_entries.empty(); }

        // Structural equality; doubles compare by bit pattern so NaN payloads
        // round-trip as equal.
        friend bool operator==(const Payload &a, const Payload &b);

    private:
        std::vector<Entry> m_entries;
    };

    bool operator==(const Payload &a, const Payload &b);
} // namespace fedsim::msgflow
