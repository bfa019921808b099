#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "pgrid/codec.hpp"
#include "pgrid/message.hpp"

namespace pgrid {

// The paper's four-port layout: each node listens on base..base+3 and every
// message type has a fixed port offset. Receivers reject type/port
// mismatches.
struct PortMap {
    std::uint16_t base = 0;

    static constexpr int kLoad = 0;     // "port 1": load status
    static constexpr int kLeader = 1;   // "port 2": leader queries/replies, admin pair
    static constexpr int kBalance = 2;  // "port 3": under-loaded queries, gossip
    static constexpr int kService = 3;  // "port 4": service discovery

    static int offset_of(const Message& m);
    std::uint16_t port_for(const Message& m) const {
        return static_cast<std::uint16_t>(base + offset_of(m));
    }
    bool valid() const { return base >= 1 && base + 3 <= 65535; }
};

// Four bound datagram sockets plus poll-based receive. Single-threaded:
// the owner alternates poll_once() with its timer work, so node handlers
// are trivially serialized.
class UdpTransport {
public:
    struct Incoming {
        Message msg;
        int port_offset = 0;        // socket the datagram arrived on
        Endpoint source;            // recvfrom address
    };

    UdpTransport() = default;
    ~UdpTransport();
    UdpTransport(const UdpTransport&) = delete;
    UdpTransport& operator=(const UdpTransport&) = delete;

    // Binds base..base+3 on listen_addr. Returns false and fills err on
    // failure (port in use, bad address).
    bool bind(const std::string& listen_addr, std::uint16_t base, std::string& err);

    // Sends m to dest's port for m's type, from our same-class socket.
    // Fire and forget; encoding errors propagate, network errors are
    // reported in the return value only.
    bool send(const Endpoint& dest, const Message& m);

    // Waits up to timeout_ms for one datagram. Malformed datagrams and
    // type/port mismatches are dropped and counted.
    std::optional<Incoming> poll_once(int timeout_ms);

    std::uint64_t malformed_count() const { return malformed_; }
    std::uint64_t mismatch_count() const { return mismatch_; }
    std::uint16_t base_port() const { return ports_.base; }

private:
    PortMap ports_;
    std::array<int, 4> fds_{-1, -1, -1, -1};
    std::uint64_t malformed_ = 0;
    std::uint64_t mismatch_ = 0;
};

}  // namespace pgrid
