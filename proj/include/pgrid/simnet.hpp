#pragma once

#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>

#include "pgrid/metrics.hpp"
#include "pgrid/node.hpp"
#include "pgrid/scenario.hpp"
#include "pgrid/trace.hpp"

namespace pgrid {

// Deterministic discrete-event engine: runs every node of a scenario in one
// execution context, delivers messages with seeded latency and loss, injects
// workload and churn, and collects the metrics report. Identical
// (scenario, seed) pairs produce byte-identical traces and metrics.
class SimNet {
public:
    explicit SimNet(Scenario scenario);

    void run();  // executes the event loop up to the horizon

    const MetricsReport& metrics() const { return metrics_; }
    const Trace& trace() const { return trace_; }

    std::vector<Endpoint> endpoints() const;
    const Node& node(const Endpoint& e) const;
    bool online(const Endpoint& e) const;
    const std::map<Endpoint, DomainName>& assignment() const { return assignment_; }
    std::size_t domain_size(const DomainName& d) const;
    std::size_t domain_count() const { return domain_sizes_.size(); }
    double now() const { return now_; }

    // Ground truth for discovery tests: every online node whose own_services
    // contains the service. Reads global state; node handlers never can.
    std::set<Endpoint> oracle_lookup(const ServiceName& service) const;

    struct FloodResult {
        bool found = false;
        std::uint64_t messages = 0;
    };
    // The rejected flooding alternative, measured out of band: a TTL-limited
    // broadcast over the hop-1 neighbor graph. Does not touch node state.
    FloodResult resolve_service_flooding(const Endpoint& origin,
                                         const ServiceName& service) const;

private:
    enum class Ek {
        DELIVER,
        TICK_STATUS,
        TICK_BALANCE,
        TICK_SERVICES,
        TICK_REFRESH,
        ONESHOT,
        TASK_START,
        TASK_END,
        LOOKUP,
        CHURN,
        SAMPLE,
    };

    struct Ev {
        double t = 0.0;
        std::uint64_t seq = 0;
        Ek kind{};
        Endpoint node;      // target node where applicable
        Endpoint from;      // sender for DELIVER
        Message msg;        // DELIVER
        std::uint64_t from_inc = 0, to_inc = 0;
        TimerKind timer{};  // ONESHOT
        std::uint64_t token = 0;
        Task task;          // TASK_START
        std::string task_id;
        ServiceName service;      // LOOKUP
        std::size_t lookup_idx = 0;
        bool up = false;  // CHURN
    };

    struct EvOrder {
        bool operator()(const Ev& a, const Ev& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.seq > b.seq;
        }
    };

    struct SimNode {
        std::unique_ptr<Node> node;
        bool online = true;
        std::uint64_t inc = 0;
        std::map<std::string, Task> tasks;  // live synthetic demand
        NodeInfo info;
        BootstrapTables boot;
        std::uint64_t qid_base = 0;
    };

    void schedule(double t, Ev ev);
    void boot_node(SimNode& sn, double now);
    void schedule_ticks(const Endpoint& ep, double from_t);
    void process_actions(const Endpoint& from, Actions&& acts, double now);
    void handle_event(const Ev& ev);
    void finalize_resolution(const Endpoint& ep, const ResolutionEvent& rev, double now);
    void execute_decision(const Endpoint& source, const MigrationDecision& d, double now);
    LoadSample probe_of(const SimNode& sn, double now) const;
    std::optional<TaskDemand> migration_candidate(const SimNode& sn) const;
    double total_demand() const;
    int flood_ttl() const;

    Scenario sc_;
    std::map<Endpoint, DomainName> assignment_;
    std::map<DomainName, std::size_t> domain_sizes_;
    std::map<Endpoint, SimNode> nodes_;
    std::priority_queue<Ev, std::vector<Ev>, EvOrder> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
    DetRng net_rng_;
    std::map<std::pair<Endpoint, Endpoint>, double> fifo_;  // per-pair delivery floor

    MetricsReport metrics_;
    Trace trace_;
    std::map<std::uint64_t, std::size_t> qid_lookup_;  // qid -> lookup index
    bool ran_ = false;
};

}  // namespace pgrid
