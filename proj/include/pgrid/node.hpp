#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pgrid/message.hpp"
#include "pgrid/rng.hpp"
#include "pgrid/tables.hpp"

namespace pgrid {

struct NodeConfig {
    double status_period = 1.0;
    double balance_period = 3.0;
    double gl_refresh_period = 100.0;
    double services_period_multiplier = 5.0;  // services tick = status_period * this
    double gl_election_timeout = 5.0;
    double query_timeout = 10.0;
    double ext_reply_timeout = 5.0;
    double ttl = 3.0;  // under-loaded entry liveness, 3x status period
    std::size_t gossip_fanout_k = 3;
    std::size_t reply_sample_size = 3;
    LoadThresholds thresholds;
    bool balancing_enabled = true;

    bool valid() const {
        return status_period > 0 && balance_period > 0 && gl_refresh_period > 0 &&
               services_period_multiplier > 0 && gl_election_timeout > 0 && query_timeout > 0 &&
               ext_reply_timeout > 0 && ttl > 0 && gossip_fanout_k >= 1 &&
               reply_sample_size >= 1 && thresholds.valid();
    }
};

// One-shot timers the node asks its transport to arm. Periodic ticks
// (status, balance, services, gl refresh) are driven by the transport
// directly from the periods in NodeConfig.
enum class TimerKind {
    ELECTION,        // no GL_REPLY within gl_election_timeout -> self-elect
    LEADER_REPROBE,  // re-probe after a leader-bound request timed out
    QUERY_TIMEOUT,   // pending service resolution, token = qid
    EXT_REPLY_TIMEOUT,
};

struct TimerArm {
    TimerKind kind;
    double delay = 0.0;
    std::uint64_t token = 0;
};

struct Send {
    Endpoint to;
    Message msg;
};

enum class MigrationTier { LOCAL, EXTERNAL };

struct MigrationDecision {
    std::string task_id;
    Endpoint target;
    MigrationTier tier = MigrationTier::LOCAL;
    double decided_at = 0.0;
};

// Demand shape of the task a node would migrate away when overloaded.
struct TaskDemand {
    std::string task_id;
    double cpu = 0.0;
    double ram = 0.0;
};

struct Resolution {
    enum class Kind { LOCAL, DOMAIN, REMOTE, PENDING, NOT_FOUND };
    enum class Miss { NONE, NO_LEADER, TIMEOUT, NO_PROVIDERS, NOT_LEADER };

    Kind kind = Kind::NOT_FOUND;
    std::optional<Endpoint> provider;
    std::uint64_t qid = 0;
    Miss reason = Miss::NONE;
};

// Completion of an earlier PENDING resolution.
struct ResolutionEvent {
    std::uint64_t qid = 0;
    Resolution outcome;
};

// Everything a handler asks the transport to do. Handlers never touch the
// network themselves; the transport (simulator or UDP daemon) performs the
// sends, arms the timers, and hands decisions to the migration executor.
struct Actions {
    std::vector<Send> sends;
    std::vector<TimerArm> timers;
    std::vector<MigrationDecision> decisions;
    std::vector<ResolutionEvent> resolutions;
    bool elected = false;  // a self-election happened in this handler

    void merge(Actions&& other);
};

enum class Role { MEMBER, LEADER };

// Tables handed to a node at admission time.
struct BootstrapTables {
    DomainName domain;
    std::set<Endpoint> local_domain_members;                  // peers, without self
    std::map<Endpoint, double> local_capacities;              // peers and self
    std::map<DomainName, std::set<Endpoint>> external_nodes;  // sample per foreign domain
};

// Counters for packets a node dropped instead of processing.
struct DropCounters {
    std::uint64_t unknown_sender = 0;
    std::uint64_t not_leader = 0;
    std::uint64_t foreign_domain = 0;
    std::uint64_t unknown_qid = 0;
    std::uint64_t stale = 0;

    std::uint64_t total() const {
        return unknown_sender + not_leader + foreign_domain + unknown_qid + stale;
    }
};

// The per-node protocol state machine. Transport-agnostic and single-owner:
// exactly one handler runs at a time; each handler is a transition
// (state, event) -> (state, actions). The same class backs the discrete
// event simulator and the UDP daemon.
class Node {
public:
    Node(NodeInfo self, NodeConfig config, BootstrapTables boot, std::uint64_t rng_seed,
         std::uint64_t qid_base = 0);

    // --- lifecycle and timers ---
    Actions on_start(double now);
    Actions on_timer(TimerKind kind, std::uint64_t token, double now);

    // --- periodic ticks (driven by the transport) ---
    Actions on_status_tick(const LoadSample& probe, double now);
    Actions on_balance_tick(const LoadSample& probe, const std::optional<TaskDemand>& candidate,
                            double now);
    Actions on_services_tick(double now);
    Actions on_gl_refresh_tick(double now);

    // --- message dispatch ---
    Actions on_message(const Message& m, double now);

    // --- service resolution entry point (the lookup pipeline) ---
    std::pair<Resolution, Actions> resolve_service(const ServiceName& service, double now);

    // --- state inspection ---
    const NodeInfo& info() const { return self_; }
    const NodeConfig& config() const { return config_; }
    Role role() const { return role_; }
    std::uint64_t epoch() const { return epoch_; }
    std::optional<Endpoint> my_leader() const;
    std::uint64_t leader_epoch() const { return belief_ ? belief_->epoch : 0; }
    const MembershipTables& tables() const { return tables_; }
    const ServiceTables& services() const { return services_; }
    const UnderLoadedLocalList& under_local() const { return under_local_; }
    LoadClass last_class() const { return last_class_; }
    const DropCounters& drops() const { return drops_; }
    std::size_t pending_origin_count() const { return pending_origin_.size(); }
    std::size_t pending_gl_count() const { return pending_gl_.size(); }

    void set_own_services(std::set<ServiceName> services);
    void apply_admin_tables(const AdminTables& t);

    // Exposed for the balancer: picks a migration target from the local
    // under-loaded list by demand shape, or nullopt when no section fits.
    std::optional<Endpoint> select_local_target(const TaskDemand& demand);

private:
    struct LeaderClaim {
        Endpoint leader;
        std::uint64_t epoch = 0;
    };

    struct PendingOrigin {
        ServiceName service;
        double issued_at = 0.0;
    };

    struct PendingQuery {
        std::uint64_t qid = 0;
        Endpoint origin;
        ServiceName service;
        double issued_at = 0.0;
    };

    // claim comparison: (epoch, capacity, inverse endpoint order)
    bool claim_beats(const LeaderClaim& a, const LeaderClaim& b) const;
    double capacity_of(const Endpoint& e) const;

    Actions self_elect(double now);
    void start_election(double now, Actions& out);
    Actions handle_gl_reply(const GlReply& m, double now);
    Actions handle_gl_query(const GlQuery& m, double now);
    Actions handle_gl_of_domain_query(const GlOfDomainQuery& m, double now);
    Actions handle_gl_of_domain_reply(const GlOfDomainReply& m, double now);
    Actions handle_load_status(const LoadStatus& m, double now);
    Actions handle_underloaded_gossip(const UnderloadedGossip& m, double now);
    Actions handle_ext_underloaded_query(const ExtUnderloadedQuery& m, double now);
    Actions handle_ext_underloaded_reply(const ExtUnderloadedReply& m, double now);
    Actions handle_own_services(const OwnServices& m, double now);
    Actions handle_service_query(const ServiceQuery& m, double now);
    Actions handle_service_fwd(const ServiceFwd& m, double now);
    Actions handle_service_reply(const ServiceReply& m, double now);

    void leader_bound_timeout(double now, Actions& out);
    void gossip_snapshot(Actions& out);
    void gossip_to(const Endpoint& gl, Actions& out);
    std::vector<Endpoint> external_endpoints() const;
    void expire_pending_gl(double now);

    NodeInfo self_;
    NodeConfig config_;
    DomainName domain_;

    Role role_ = Role::MEMBER;
    std::uint64_t epoch_ = 0;        // own epoch while leader
    std::uint64_t known_epoch_ = 0;  // highest epoch seen for this domain
    std::optional<LeaderClaim> belief_;

    MembershipTables tables_;
    std::map<Endpoint, double> local_capacities_;
    UnderLoadedLocalList under_local_;
    ServiceTables services_;
    LoadClass last_class_ = LoadClass::NORMAL;

    std::map<std::uint64_t, PendingOrigin> pending_origin_;
    std::vector<PendingQuery> pending_gl_;
    std::uint64_t next_qid_ = 1;

    // token validity counters; a one-shot timer fires only if its token
    // still matches, so superseded timers become no-ops
    std::uint64_t election_token_ = 0;
    bool election_armed_ = false;
    std::uint64_t reprobe_token_ = 0;
    bool reprobe_armed_ = false;
    std::uint64_t ext_token_ = 0;
    std::optional<TaskDemand> ext_wait_;

    DropCounters drops_;
    DetRng rng_;
};

}  // namespace pgrid
