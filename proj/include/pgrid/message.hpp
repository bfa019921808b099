#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "pgrid/endpoint.hpp"
#include "pgrid/load.hpp"

namespace pgrid {

// Reason token carried by reply messages. NOT_LEADER tells the origin its
// leader table is stale and it should re-probe leadership.
enum class ReplyReason { NONE, NOT_LEADER };

struct LoadStatus {
    Endpoint from;
    double cpu = 0.0;  // wire precision: two decimals
    double ram = 0.0;
    LoadClass cls = LoadClass::NORMAL;
    bool operator==(const LoadStatus&) const = default;
};

struct GlQuery {
    Endpoint from;
    bool operator==(const GlQuery&) const = default;
};

struct GlReply {
    Endpoint leader;
    DomainName domain;
    std::uint64_t epoch = 0;
    bool operator==(const GlReply&) const = default;
};

struct GlOfDomainQuery {
    Endpoint from;
    bool operator==(const GlOfDomainQuery&) const = default;
};

struct GlOfDomainReply {
    DomainName domain;
    Endpoint leader;
    bool operator==(const GlOfDomainReply&) const = default;
};

struct UnderloadedGossip {
    DomainName domain;
    std::vector<Endpoint> nodes;
    bool operator==(const UnderloadedGossip&) const = default;
};

struct ExtUnderloadedQuery {
    Endpoint from;
    bool operator==(const ExtUnderloadedQuery&) const = default;
};

struct ExtUnderloadedReply {
    std::vector<Endpoint> nodes;
    ReplyReason reason = ReplyReason::NONE;
    bool operator==(const ExtUnderloadedReply&) const = default;
};

struct OwnServices {
    Endpoint from;
    std::vector<ServiceName> services;
    bool operator==(const OwnServices&) const = default;
};

struct ServiceQuery {
    Endpoint origin;
    ServiceName service;
    std::uint64_t qid = 0;
    bool operator==(const ServiceQuery&) const = default;
};

struct ServiceFwd {
    Endpoint origin;
    Endpoint via_gl;
    ServiceName service;
    std::uint64_t qid = 0;
    bool operator==(const ServiceFwd&) const = default;
};

struct ServiceReply {
    ServiceName service;
    std::vector<Endpoint> providers;
    std::uint64_t qid = 0;
    ReplyReason reason = ReplyReason::NONE;
    bool operator==(const ServiceReply&) const = default;
};

// Bootstrap pair, daemon mode only: a joining node asks the grid admin for
// its tables; the admin replies (and pushes refreshed tables to existing
// domain members when somebody new joins).
struct AdminJoin {
    Endpoint from;
    double capacity = 0.0;  // two decimals on the wire
    bool operator==(const AdminJoin&) const = default;
};

struct AdminTables {
    DomainName domain;
    std::vector<Endpoint> members;
    std::vector<double> capacities;  // parallel to members, two decimals
    std::map<DomainName, std::vector<Endpoint>> external;
    bool operator==(const AdminTables&) const = default;
};

using Message =
    std::variant<LoadStatus, GlQuery, GlReply, GlOfDomainQuery, GlOfDomainReply, UnderloadedGossip,
                 ExtUnderloadedQuery, ExtUnderloadedReply, OwnServices, ServiceQuery, ServiceFwd,
                 ServiceReply, AdminJoin, AdminTables>;

// Wire type token ("LOAD", "GLQ", ...). Stable; used in traces and metrics.
const char* type_token(const Message& m);

}  // namespace pgrid
