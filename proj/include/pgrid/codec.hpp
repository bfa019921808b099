#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pgrid/message.hpp"

namespace pgrid {

// One message per UDP datagram. Every encoding is a single UTF-8 line:
//   "PG1" SP type-token SP field... "\n"
// Lists are comma separated with no spaces; "-" stands for the empty list.
// Reals carry exactly two decimals. See docs/wire-format.md for the full
// grammar and the golden corpus.
inline constexpr std::size_t kMaxWireBytes = 1200;

struct OversizeMessage : std::length_error {
    using std::length_error::length_error;
};

// Encodes m. Throws OversizeMessage if the line would exceed kMaxWireBytes;
// senders cap list lengths before encoding, the codec never truncates.
std::string encode(const Message& m);

// Inverse of encode on its image. Returns nullopt for anything else
// (wrong prefix, unknown token, arity mismatch, unparsable field); never
// throws on arbitrary input. The receiver drops and counts such packets.
std::optional<Message> decode(std::string_view line);

}  // namespace pgrid
