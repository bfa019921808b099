#pragma once

#include <map>
#include <set>
#include <vector>

#include "pgrid/endpoint.hpp"
#include "pgrid/load.hpp"

namespace pgrid {

// Per-domain registry of under-loaded peers, kept by every node.
// Three pairwise-disjoint sections: under-loaded in both CPU and RAM,
// in CPU only, in RAM only. Entries carry a freshness timestamp.
struct UnderLoadedLocalList {
    std::set<Endpoint> section_both;
    std::set<Endpoint> section_cpu;
    std::set<Endpoint> section_ram;
    std::map<Endpoint, double> last_update;

    bool contains(const Endpoint& e) const { return last_update.count(e) > 0; }
    std::size_t size() const { return last_update.size(); }
    bool empty() const { return last_update.empty(); }

    // All members across the three sections, in endpoint order.
    std::vector<Endpoint> all() const;
};

// Places `from` in the section matching `cls`, or removes it entirely for
// NORMAL / OVERLOADED. Returns true when section membership changed
// (a pure timestamp refresh returns false).
bool apply_load_status(UnderLoadedLocalList& list, const Endpoint& from, LoadClass cls,
                       double now);

// Drops every entry older than ttl (strictly: now - last_update > ttl).
// Returns the number of entries removed.
std::size_t expire_stale(UnderLoadedLocalList& list, double now, double ttl);

struct MembershipTables {
    std::set<Endpoint> local_domain_members;               // peers only, never self
    std::map<DomainName, std::set<Endpoint>> external_nodes_list;
    std::map<DomainName, Endpoint> other_group_leader_list;
    std::map<DomainName, std::set<Endpoint>> external_under_loaded_list;
};

struct ServiceTables {
    std::set<ServiceName> own_services;
    std::map<ServiceName, std::set<Endpoint>> local_domain_services;
};

// Applies a full-state announcement: `from` now provides exactly `services`.
// Anything previously attributed to `from` but missing from the announcement
// is detached; entries left with no provider are dropped.
void merge_service_announcement(ServiceTables& tables, const Endpoint& from,
                                const std::set<ServiceName>& services);

}  // namespace pgrid
