#include "pgrid/endpoint.hpp"

#include <charconv>
#include <cstdio>

namespace pgrid {

std::string Endpoint::address() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", octets[0], octets[1], octets[2], octets[3]);
    return buf;
}

std::string Endpoint::text() const {
    char buf[28];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u:%u", octets[0], octets[1], octets[2], octets[3],
                  port);
    return buf;
}

namespace {

// Parses a decimal integer in [lo, hi]; advances *s past it on success.
bool take_int(std::string_view& s, unsigned lo, unsigned hi, unsigned& out) {
    if (s.empty() || s[0] < '0' || s[0] > '9') return false;
    unsigned v = 0;
    std::size_t i = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
        if (v > hi) return false;
        ++i;
    }
    if (i > 1 && s[0] == '0') return false;  // no leading zeros
    if (v < lo) return false;
    s.remove_prefix(i);
    out = v;
    return true;
}

}  // namespace

std::optional<Endpoint> parse_endpoint(std::string_view s) {
    Endpoint ep;
    for (int i = 0; i < 4; ++i) {
        unsigned oct = 0;
        if (!take_int(s, 0, 255, oct)) return std::nullopt;
        ep.octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(oct);
        if (i < 3) {
            if (s.empty() || s[0] != '.') return std::nullopt;
            s.remove_prefix(1);
        }
    }
    if (s.empty() || s[0] != ':') return std::nullopt;
    s.remove_prefix(1);
    unsigned port = 0;
    if (!take_int(s, 1, 65535, port)) return std::nullopt;
    if (!s.empty()) return std::nullopt;
    ep.port = static_cast<std::uint16_t>(port);
    return ep;
}

bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

}  // namespace pgrid
