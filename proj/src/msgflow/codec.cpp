#include "fedsim/msgflow/codec.hpp"

#include "fedsim/errors.hpp"

#include <bit>
#include <limits>

namespace fedsim::msgflow
{
    namespace
    {
        // Guards against hostile length prefixes before any allocation.
        constexpr int kMaxDepth = 64;

        template <typename T>
        void put_le(Bytes &out, T v)
        {
            auto u = static_cast<std::uint64_t>(v);
            for (std::size_t i = 0; i < sizeof(T); ++i)
            {
                out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
            }
        }

        void put_f64(Bytes &out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

        void put_string(Bytes &out, const std::string &s)
        {
            if (s.size() > std::numeric_limits<std::uint32_t>::max())
            {
                throw ValidationError("string too long for wire format");
            }
            put_le(out, static_cast<std::uint32_t>(s.size()));
            out.insert(out.end(), s.begin(), s.end());
        }

        class Reader
        {
        public:
            Reader(std::span<const std::uint8_t> bytes, std::size_t &offset) : m_bytes(bytes), m_offset(offset) {}

            template <typename T>
            T get_le()
            {
                need(sizeof(T));
                std::uint64_t u = 0;
                for (std::size_t i = 0; i < sizeof(T); ++i)
                {
                    u |= static_cast<std::uint64_t>(m_bytes[m_offset + i]) << (8 * i);
                }
                m_offset += sizeof(T);
                return static_cast<T>(u);
            }

            double get_f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

            std::string get_string()
            {
                const auto len = get_le<std::uint32_t>();
                need(len);
                std::string s(reinterpret_cast<const char *>(m_bytes.data() + m_offset), len);
                m_offset += len;
                return s;
            }

            Payload get_payload(int depth)
            {
                if (depth > kMaxDepth)
                {
                    throw DecodeError(m_offset, "nesting too deep");
                }
                const auto count = get_le<std::uint32_t>();
                Payload p;
                for (std::uint32_t i = 0; i < count; ++i)
                {
                    const std::size_t name_at = m_offset;
                    std::string name = get_string();
                    if (name.empty() || p.contains(name))
                    {
                        throw DecodeError(name_at, "empty or duplicate entry name");
                    }
                    const std::size_t tag_at = m_offset;
                    const auto tag = static_cast<WireTag>(get_le<std::uint8_t>());
                    switch (tag)
                    {
                    case WireTag::Real:
                        p.put(std::move(name), Value{get_f64()});
                        break;
                    case WireTag::Integer:
                        p.put(std::move(name), Value{get_le<std::int64_t>()});
                        break;
                    case WireTag::Text:
                        p.put(std::move(name), Value{get_string()});
                        break;
                    case WireTag::RealArray:
                    {
                        const auto len = get_le<std::uint64_t>();
                        if (len > (m_bytes.size() - m_offset) / 8)
                        {
                            throw DecodeError(m_bytes.size(), "array length exceeds input");
                        }
                        std::vector<double> values(static_cast<std::size_t>(len));
                        for (auto &v : values)
                        {
                            v = get_f64();
                        }
                        p.put(std::move(name), Value{std::move(values)});
                        break;
                    }
                    case WireTag::Nested:
                    {
                        Payload inner = get_payload(depth + 1);
                        p.set(std::move(name), std::move(inner));
                        break;
                    }
                    default:
                        throw DecodeError(tag_at, "unknown type tag");
                    }
                }
                return p;
            }

        private:
            void need(std::size_t n) const
            {
                if (m_bytes.size() - m_offset < n)
                {
                    throw DecodeError(m_bytes.size(), "truncated input");
                }
            }

            std::span<const std::uint8_t> m_bytes;
            std::size_t &m_offset;
        };
    } // namespace

    void encode_into(const Payload &payload, Bytes &out)
    {
        put_le(out, static_cast<std::uint32_t>(payload.size()));
        for (const auto &e : payload.entries())
        {
            put_string(out, e.name);
            std::visit(
                [&out](const auto &v)
                {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                    {
                        out.push_back(static_cast<std::uint8_t>(WireTag::Real));
                        put_f64(out, v);
                    }
                    else if constexpr (std::is_same_v<T, std::int64_t>)
                    {
                        out.push_back(static_cast<std::uint8_t>(WireTag::Integer));
                        put_le(out, v);
                    }
                    else if constexpr (std::is_same_v<T, std::string>)
                    {
                        out.push_back(static_cast<std::uint8_t>(WireTag::Text));
                        put_string(out, v);
                    }
                    else if constexpr (std::is_same_v<T, std::vector<double>>)
                    {
                        out.push_back(static_cast<std::uint8_t>(WireTag::RealArray));
                        put_le(out, static_cast<std::uint64_t>(v.size()));
                        for (double d : v)
                        {
                            put_f64(out, d);
                        }
                    }
                    else
                    {
                        out.push_back(static_cast<std::uint8_t>(WireTag::Nested));
                        encode_into(*v.value, out);
                    }
                },
                e.value);
        }
    }

    Bytes encode_message(const Payload &payload)
    {
        Bytes out;
        encode_into(payload, out);
        return out;
    }

    Payload decode_from(std::span<const std::uint8_t> bytes, std::size_t &offset)
    {
        Reader r(bytes, offset);
        return r.get_payload(0);
    }

    Payload decode_message(std::span<const std::uint8_t> bytes)
    {
        std::size_t offset = 0;
        Payload p = decode_from(bytes, offset);
        if (offset != bytes.size())
        {
            throw DecodeError(offset, "trailing bytes after payload");
        }
        return p;
    }
} // namespace fedsim::msgflow
