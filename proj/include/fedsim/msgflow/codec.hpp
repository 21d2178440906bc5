#pragma once

#include "fedsim/msgflow/payload.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fedsim::msgflow
{
    using Bytes = std::vector<std::uint8_t>;

    // Wire layout (all integers little-endian):
    //   payload := u32 entry_count, entry*
    //   entry   := u32 name_len, name bytes, u8 tag, value
    //   tag 1 f64      : 8 bytes IEEE-754 bit pattern
    //   tag 2 i64      : 8 bytes two's complement
    //   tag 3 string   : u32 len, bytes
    //   tag 4 f64 array: u64 len, len * 8 bytes
    //   tag 5 nested   : payload
    enum class WireTag : std::uint8_t
    {
        Real = 1,
        Integer = 2,
        Text = 3,
        RealArray = 4,
        Nested = 5,
    };

    Bytes encode_message(const Payload &payload);
    void encode_into(const Payload &payload, Bytes &out);

    // Throws DecodeError carrying the offset of the first byte that could not
    // be consumed. Trailing bytes after the top-level payload are an error.
    Payload decode_message(std::span<const std::uint8_t> bytes);

    // Decodes one payload starting at `offset` and advances it.
    Payload decode_from(std::span<const std::uint8_t> bytes, std::size_t &offset);
} // namespace fedsim::msgflow
