#include "pgrid/udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace pgrid {

int PortMap::offset_of(const Message& m) {
    struct V {
        int operator()(const LoadStatus&) { return kLoad; }
        int operator()(const GlQuery&) { return kLeader; }
        int operator()(const GlReply&) { return kLeader; }
        int operator()(const GlOfDomainQuery&) { return kLeader; }
        int operator()(const GlOfDomainReply&) { return kLeader; }
        int operator()(const AdminJoin&) { return kLeader; }
        int operator()(const AdminTables&) { return kLeader; }
        int operator()(const UnderloadedGossip&) { return kBalance; }
        int operator()(const ExtUnderloadedQuery&) { return kBalance; }
        int operator()(const ExtUnderloadedReply&) { return kBalance; }
        int operator()(const OwnServices&) { return kService; }
        int operator()(const ServiceQuery&) { return kService; }
        int operator()(const ServiceFwd&) { return kService; }
        int operator()(const ServiceReply&) { return kService; }
    };
    return std::visit(V{}, m);
}

UdpTransport::~UdpTransport() {
    for (int fd : fds_)
        if (fd >= 0) ::close(fd);
}

bool UdpTransport::bind(const std::string& listen_addr, std::uint16_t base, std::string& err) {
    ports_.base = base;
    if (!ports_.valid()) {
        err = "base port out of range: " + std::to_string(base);
        return false;
    }
    in_addr addr{};
    if (::inet_pton(AF_INET, listen_addr.c_str(), &addr) != 1) {
        err = "bad listen address: " + listen_addr;
        return false;
    }
    for (int i = 0; i < 4; ++i) {
        const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd < 0) {
            err = "socket: " + std::string(std::strerror(errno));
            return false;
        }
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_addr = addr;
        sa.sin_port = htons(static_cast<std::uint16_t>(base + i));
        if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
            err = "bind " + listen_addr + ":" + std::to_string(base + i) + ": " +
                  std::strerror(errno);
            ::close(fd);
            return false;
        }
        fds_[static_cast<std::size_t>(i)] = fd;
    }
    return true;
}

bool UdpTransport::send(const Endpoint& dest, const Message& m) {
    const std::string wire = encode(m);  // OversizeMessage propagates
    const int off = PortMap::offset_of(m);
    const int fd = fds_[static_cast<std::size_t>(off)];
    if (fd < 0) return false;
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<std::uint16_t>(dest.port + off));
    const std::string addr = dest.address();
    if (::inet_pton(AF_INET, addr.c_str(), &sa.sin_addr) != 1) return false;
    const ssize_t n =
        ::sendto(fd, wire.data(), wire.size(), 0, reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
    return n == static_cast<ssize_t>(wire.size());
}

std::optional<UdpTransport::Incoming> UdpTransport::poll_once(int timeout_ms) {
    std::array<pollfd, 4> pfds{};
    for (int i = 0; i < 4; ++i) {
        pfds[static_cast<std::size_t>(i)].fd = fds_[static_cast<std::size_t>(i)];
        pfds[static_cast<std::size_t>(i)].events = POLLIN;
    }
    const int rc = ::poll(pfds.data(), pfds.size(), timeout_ms);
    if (rc <= 0) return std::nullopt;
    for (int i = 0; i < 4; ++i) {
        if (!(pfds[static_cast<std::size_t>(i)].revents & POLLIN)) continue;
        char buf[2048];
        sockaddr_in src{};
        socklen_t slen = sizeof(src);
        const ssize_t n = ::recvfrom(fds_[static_cast<std::size_t>(i)], buf, sizeof(buf), 0,
                                     reinterpret_cast<sockaddr*>(&src), &slen);
        if (n <= 0) continue;
        auto msg = decode(std::string_view(buf, static_cast<std::size_t>(n)));
        if (!msg) {
            ++malformed_;
            continue;
        }
        if (PortMap::offset_of(*msg) != i) {
            ++mismatch_;
            continue;
        }
        Incoming in;
        in.msg = std::move(*msg);
        in.port_offset = i;
        char txt[INET_ADDRSTRLEN];
        ::inet_ntop(AF_INET, &src.sin_addr, txt, sizeof(txt));
        if (auto ep = parse_endpoint(std::string(txt) + ":" + std::to_string(ntohs(src.sin_port))))
            in.source = *ep;
        return in;
    }
    return std::nullopt;
}

}  // namespace pgrid
