#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pgrid/bootstrap.hpp"
#include "pgrid/node.hpp"

namespace pgrid {

struct Task {
    std::string id;
    double cpu_share = 0.0;
    double ram_share = 0.0;
    double duration = 0.0;
};

struct WorkloadEvent {
    double time = 0.0;
    Endpoint node;
    Task task;
};

struct LookupEvent {
    double time = 0.0;
    Endpoint node;
    ServiceName service;
};

struct ChurnEvent {
    double time = 0.0;
    Endpoint node;
    bool up = false;  // false = DOWN, true = UP
};

struct NetParams {
    double latency_min = 0.05;
    double latency_max = 0.25;
    double drop_prob = 0.0;
};

// Declarative simulator input. A scenario is pure data; together with its
// seed it fully determines a run.
struct Scenario {
    std::uint64_t seed = 1;
    Topology topology;
    int hop_threshold = 3;
    NodeConfig node_config;
    std::map<Endpoint, std::set<ServiceName>> services;
    std::vector<WorkloadEvent> workload;
    std::vector<LookupEvent> lookups;
    std::vector<ChurnEvent> churn;
    NetParams net;
    double horizon = 100.0;
    bool baseline = false;  // also measure the flooding alternative

    // Field-level diagnostics; empty when the scenario is valid.
    std::vector<std::string> validate() const;
};

// Parses a scenario document (JSON). Generator shorthands inside the file
// ("generate" topology, "generate_workload", "generate_lookups",
// "generate_churn", "generate_services") are expanded deterministically
// from the scenario seed. On failure returns nullopt and fills
// diagnostics.
std::optional<Scenario> load_scenario(const std::string& text,
                                      std::vector<std::string>& diagnostics);
std::optional<Scenario> load_scenario_file(const std::string& path,
                                           std::vector<std::string>& diagnostics);

// Clustered topology helper: `domains` cliques of `domain_size` nodes at
// hop 1 inside, gateway ring between clusters, everything else shortest
// path over that graph. Used by the generator shorthand and tests.
Topology make_clustered_topology(int domains, int domain_size, std::uint16_t port,
                                 double capacity_lo, double capacity_hi, std::uint64_t seed);

// Standalone topology document ({"nodes": [...], "hops": [...]} or a
// {"generate": ...} shorthand), as consumed by the admin daemon.
std::optional<Topology> load_topology_file(const std::string& path,
                                           std::vector<std::string>& diagnostics);

}  // namespace pgrid
