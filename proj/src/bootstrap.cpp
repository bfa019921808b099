#include "pgrid/bootstrap.hpp"

#include <algorithm>

namespace pgrid {

void Topology::set_hop(const Endpoint& a, const Endpoint& b, int count) {
    if (a == b) return;
    hop[a < b ? std::make_pair(a, b) : std::make_pair(b, a)] = count;
}

int Topology::hop_of(const Endpoint& a, const Endpoint& b) const {
    if (a == b) return 0;
    auto it = hop.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    return it == hop.end() ? -1 : it->second;
}

bool Topology::complete() const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if (hop_of(nodes[i].endpoint, nodes[j].endpoint) < 0) return false;
    return true;
}

std::optional<const NodeInfo*> Topology::find(const Endpoint& e) const {
    for (const auto& n : nodes)
        if (n.endpoint == e) return &n;
    return std::nullopt;
}

std::map<Endpoint, DomainName> assign_domains(const Topology& topo, int hop_threshold) {
    std::vector<Endpoint> order;
    for (const auto& n : topo.nodes) order.push_back(n.endpoint);
    std::sort(order.begin(), order.end());

    std::vector<std::pair<DomainName, std::vector<Endpoint>>> domains;
    std::map<Endpoint, DomainName> out;
    for (const auto& ep : order) {
        bool placed = false;
        for (auto& [name, members] : domains) {
            const bool fits = std::all_of(members.begin(), members.end(), [&](const Endpoint& m) {
                const int h = topo.hop_of(ep, m);
                return h >= 0 && h < hop_threshold;
            });
            if (fits) {
                members.push_back(ep);
                out[ep] = name;
                placed = true;
                break;
            }
        }
        if (!placed) {
            DomainName name = "D" + std::to_string(domains.size() + 1);
            domains.push_back({name, {ep}});
            out[ep] = name;
        }
    }
    return out;
}

Admin::Admin(Topology topo, int hop_threshold)
    : topo_(std::move(topo)), assignment_(assign_domains(topo_, hop_threshold)) {}

BootstrapTables Admin::tables_for(const Endpoint& e) const {
    BootstrapTables t;
    t.domain = assignment_.at(e);
    for (const auto& ep : admitted_) {
        if (assignment_.at(ep) != t.domain) continue;
        if (ep != e) t.local_domain_members.insert(ep);
        if (auto info = topo_.find(ep)) t.local_capacities[ep] = (*info)->capacity_score;
    }
    // a sample of admitted nodes per foreign domain, smallest endpoints first
    std::map<DomainName, std::set<Endpoint>> by_domain;
    for (const auto& ep : admitted_) by_domain[assignment_.at(ep)].insert(ep);
    for (const auto& [dom, eps] : by_domain) {
        if (dom == t.domain) continue;
        std::set<Endpoint> sample;
        for (const auto& ep : eps) {
            sample.insert(ep);
            if (sample.size() >= kExtSampleSize) break;
        }
        if (!sample.empty()) t.external_nodes[dom] = sample;
    }
    return t;
}

AdminTables Admin::admin_tables_for(const Endpoint& e) const {
    const BootstrapTables bt = tables_for(e);
    AdminTables t;
    t.domain = bt.domain;
    t.members.push_back(e);
    t.capacities.push_back(bt.local_capacities.count(e) ? bt.local_capacities.at(e) : 0.0);
    for (const auto& ep : bt.local_domain_members) {
        t.members.push_back(ep);
        t.capacities.push_back(bt.local_capacities.count(ep) ? bt.local_capacities.at(ep) : 0.0);
    }
    for (const auto& [dom, eps] : bt.external_nodes)
        t.external[dom] = std::vector<Endpoint>(eps.begin(), eps.end());
    return t;
}

std::optional<Admin::Admission> Admin::admit_node(const NodeInfo& node, Error* err) {
    const Endpoint& e = node.endpoint;
    if (!assignment_.count(e)) {
        if (err) err->what = "endpoint not in topology: " + e.text();
        return std::nullopt;
    }
    if (admitted_.count(e)) {
        if (err) err->what = "duplicate endpoint: " + e.text();
        return std::nullopt;
    }
    admitted_.insert(e);

    Admission adm;
    adm.tables = tables_for(e);
    // refresh everyone already in: domain members see the newcomer, nodes
    // elsewhere see the external sample grow ("each node updates its list
    // timely")
    for (const auto& ep : admitted_) {
        if (ep == e) continue;
        adm.updates.push_back({ep, admin_tables_for(ep)});
    }
    return adm;
}

}  // namespace pgrid
