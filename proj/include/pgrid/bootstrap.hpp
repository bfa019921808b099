#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pgrid/message.hpp"
#include "pgrid/node.hpp"

namespace pgrid {

// Static network description: every node plus the pairwise hop counts the
// admin partitions on. Hop counts are inputs, not measurements.
struct Topology {
    std::vector<NodeInfo> nodes;
    std::map<std::pair<Endpoint, Endpoint>, int> hop;  // keys stored with a < b

    void set_hop(const Endpoint& a, const Endpoint& b, int count);
    int hop_of(const Endpoint& a, const Endpoint& b) const;  // hop(a,a) = 0
    bool complete() const;  // every unordered pair present

    std::optional<const NodeInfo*> find(const Endpoint& e) const;
};

// Greedy clustering in endpoint order: each node joins the first existing
// domain whose every member is closer than hop_threshold, else founds a new
// one. Domains are named D1, D2, ... in founding order.
std::map<Endpoint, DomainName> assign_domains(const Topology& topo, int hop_threshold);

// The grid admin: owns the domain assignment and admits nodes one at a
// time, handing each its bootstrap tables and refreshing the tables of the
// nodes already in its domain.
class Admin {
public:
    // external_nodes_list carries at most this many endpoints per foreign
    // domain ("some of the nodes of each other domains")
    static constexpr std::size_t kExtSampleSize = 2;

    Admin(Topology topo, int hop_threshold);

    const std::map<Endpoint, DomainName>& assignment() const { return assignment_; }

    struct Admission {
        BootstrapTables tables;
        // table refreshes for the domain members admitted earlier
        std::vector<std::pair<Endpoint, AdminTables>> updates;
    };

    struct Error {
        std::string what;
    };

    // Admits a node present in the topology. Fails on duplicate admission
    // or an endpoint the topology does not know.
    std::optional<Admission> admit_node(const NodeInfo& node, Error* err = nullptr);

    bool admitted(const Endpoint& e) const { return admitted_.count(e) > 0; }

    // Bootstrap tables reflecting the current admission state (used to
    // answer a duplicate JOIN idempotently).
    BootstrapTables tables_for(const Endpoint& e) const;

private:
    AdminTables admin_tables_for(const Endpoint& e) const;

    Topology topo_;
    std::map<Endpoint, DomainName> assignment_;
    std::set<Endpoint> admitted_;
};

}  // namespace pgrid
