#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pgrid {

using DomainName = std::string;
using ServiceName = std::string;

// Node identity: IPv4 address kept as four octets plus a port.
// Ordering is lexicographic on (octets, port); it is the tie-break used
// everywhere a deterministic pick among endpoints is needed.
struct Endpoint {
    std::array<std::uint8_t, 4> octets{};
    std::uint16_t port = 0;

    auto operator<=>(const Endpoint&) const = default;

    std::string text() const;  // "a.b.c.d:port"
    std::string address() const;
};

// Parses "a.b.c.d:port". Rejects out-of-range octets, port 0, junk.
std::optional<Endpoint> parse_endpoint(std::string_view s);

struct NodeInfo {
    Endpoint endpoint;
    DomainName domain;
    double capacity_score = 0.0;  // abstract capacity, >= 0

    bool valid() const { return capacity_score >= 0.0 && !domain.empty(); }
};

// Service and domain names travel in comma/semicolon separated wire lists,
// so the allowed alphabet excludes separators and whitespace.
bool valid_name(std::string_view s);

}  // namespace pgrid
