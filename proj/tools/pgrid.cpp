// pgrid: run simulations, a live daemon node, the bootstrap admin, or a
// one-shot service lookup against a running grid.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pgrid/codec.hpp"
#include "pgrid/migrate.hpp"
#include "pgrid/simnet.hpp"
#include "pgrid/udp.hpp"

using namespace pgrid;

namespace {

double now_seconds() {
    using namespace std::chrono;
    static const auto start = steady_clock::now();
    return duration<double>(steady_clock::now() - start).count();
}

void logline(const std::string& s) {
    std::printf("%9.3f %s\n", now_seconds(), s.c_str());
    std::fflush(stdout);
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("PGRID_SEED");
    if (!v) return std::nullopt;
    return std::strtoull(v, nullptr, 10);
}

bool write_file(const std::string& path, const std::string& content, std::string& err) {
    std::ofstream out(path);
    if (!out) {
        err = "cannot write " + path;
        return false;
    }
    out << content;
    return true;
}

// ---------------------------------------------------------------- sim ----

int cmd_sim(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            const std::string& metrics_path, const std::string& trace_path,
            const std::string& baseline) {
    std::vector<std::string> diag;
    auto sc = load_scenario_file(scenario_path, diag);
    if (!sc) {
        for (const auto& d : diag) std::fprintf(stderr, "scenario: %s\n", d.c_str());
        return 2;
    }
    if (!seed) seed = env_seed();
    if (seed) {
        // the seed feeds the generators too; re-expand the document with it
        std::ifstream in(scenario_path);
        std::stringstream ss;
        ss << in.rdbuf();
        auto j = nlohmann::json::parse(ss.str(), nullptr, false);
        j["seed"] = *seed;
        diag.clear();
        sc = load_scenario(j.dump(), diag);
        if (!sc) {
            for (const auto& d : diag) std::fprintf(stderr, "scenario: %s\n", d.c_str());
            return 2;
        }
    }
    if (baseline == "on") sc->baseline = true;
    if (baseline == "off") sc->baseline = false;

    SimNet sim(*sc);
    sim.run();

    std::string err;
    const std::string metrics_json = sim.metrics().to_json();
    if (metrics_path.empty()) {
        std::fputs(metrics_json.c_str(), stdout);
    } else {
        if (!write_file(metrics_path, metrics_json, err) ||
            !write_file(metrics_path + ".series.csv", sim.metrics().series_csv(), err)) {
            std::fprintf(stderr, "%s\n", err.c_str());
            return 1;
        }
    }
    if (!trace_path.empty()) {
        if (!write_file(trace_path, render(sim.trace()), err)) {
            std::fprintf(stderr, "%s\n", err.c_str());
            return 1;
        }
    }
    return 0;
}

// --------------------------------------------------------------- admin ----

int cmd_admin(const std::string& topology_path, int hop_threshold,
              const std::string& listen) {
    std::vector<std::string> diag;
    auto topo = load_topology_file(topology_path, diag);
    if (!topo) {
        for (const auto& d : diag) std::fprintf(stderr, "topology: %s\n", d.c_str());
        return 2;
    }
    auto listen_ep = parse_endpoint(listen);
    if (!listen_ep) {
        std::fprintf(stderr, "bad --listen endpoint: %s\n", listen.c_str());
        return 2;
    }

    Admin admin(*topo, hop_threshold);
    std::printf("domain assignment (hop threshold %d):\n", hop_threshold);
    for (const auto& [ep, dom] : admin.assignment())
        std::printf("  %-22s %s\n", ep.text().c_str(), dom.c_str());
    std::fflush(stdout);

    UdpTransport net;
    std::string err;
    if (!net.bind(listen_ep->address(), listen_ep->port, err)) {
        std::fprintf(stderr, "%s\n", err.c_str());
        return 1;
    }
    logline("admin listening on " + listen_ep->text());

    while (true) {
        auto in = net.poll_once(500);
        if (!in) continue;
        const auto* join = std::get_if<AdminJoin>(&in->msg);
        if (!join) continue;

        auto make_tables = [&](const Endpoint& e) {
            const BootstrapTables bt = admin.tables_for(e);
            AdminTables t;
            t.domain = bt.domain;
            t.members.push_back(e);
            t.capacities.push_back(bt.local_capacities.count(e) ? bt.local_capacities.at(e)
                                                                : 0.0);
            for (const auto& ep : bt.local_domain_members) {
                t.members.push_back(ep);
                t.capacities.push_back(
                    bt.local_capacities.count(ep) ? bt.local_capacities.at(ep) : 0.0);
            }
            for (const auto& [dom, eps] : bt.external_nodes)
                t.external[dom] = std::vector<Endpoint>(eps.begin(), eps.end());
            return t;
        };

        if (admin.admitted(join->from)) {
            // a restarted node re-joining: answer idempotently
            net.send(join->from, Message{make_tables(join->from)});
            logline("rejoin " + join->from.text());
            continue;
        }
        NodeInfo info;
        info.endpoint = join->from;
        info.capacity_score = join->capacity;
        Admin::Error aerr;
        auto adm = admin.admit_node(info, &aerr);
        if (!adm) {
            logline("join refused " + join->from.text() + ": " + aerr.what);
            continue;
        }
        net.send(join->from, Message{make_tables(join->from)});
        for (const auto& [ep, tables] : adm->updates) net.send(ep, Message{tables});
        logline("admitted " + join->from.text() + " into " + adm->tables.domain);
    }
}

// ---------------------------------------------------------------- node ----

struct Probe {
    // "static:cpu,ram" or "file:/path" (two whitespace-separated reals)
    std::string spec = "static:0.10,0.10";
    double cpu = 0.10, ram = 0.10;

    bool parse() {
        if (spec.rfind("static:", 0) == 0) {
            return std::sscanf(spec.c_str() + 7, "%lf,%lf", &cpu, &ram) == 2;
        }
        return spec.rfind("file:", 0) == 0;
    }

    LoadSample sample(double now) {
        if (spec.rfind("file:", 0) == 0) {
            std::ifstream in(spec.substr(5));
            double c, r;
            if (in >> c >> r) {
                cpu = c;
                ram = r;
            }
        }
        return {std::min(1.0, std::max(0.0, cpu)), std::min(1.0, std::max(0.0, ram)), now};
    }
};

int cmd_node(const std::string& listen, const std::string& admin_addr,
             const std::string& services_csv, std::uint64_t seed, double capacity,
             const std::string& migrate_hook, Probe probe, NodeConfig cfg) {
    auto self_ep = parse_endpoint(listen);
    auto admin_ep = parse_endpoint(admin_addr);
    if (!self_ep || !admin_ep) {
        std::fprintf(stderr, "bad --listen or --admin endpoint\n");
        return 2;
    }
    if (!probe.parse()) {
        std::fprintf(stderr, "bad --probe spec: %s\n", probe.spec.c_str());
        return 2;
    }

    UdpTransport net;
    std::string err;
    if (!net.bind(self_ep->address(), self_ep->port, err)) {
        std::fprintf(stderr, "%s\n", err.c_str());
        return 1;
    }

    // join the grid: retry until the admin answers with our tables
    std::optional<AdminTables> tables;
    for (int attempt = 0; attempt < 20 && !tables; ++attempt) {
        net.send(*admin_ep, Message{AdminJoin{*self_ep, capacity}});
        const double deadline = now_seconds() + 0.5;
        while (now_seconds() < deadline) {
            auto in = net.poll_once(100);
            if (!in) continue;
            if (const auto* t = std::get_if<AdminTables>(&in->msg)) {
                tables = *t;
                break;
            }
        }
    }
    if (!tables) {
        std::fprintf(stderr, "admin unreachable at %s\n", admin_ep->text().c_str());
        return 1;
    }
    logline("joined domain " + tables->domain + " (" + std::to_string(tables->members.size()) +
            " members known)");

    BootstrapTables boot;
    boot.domain = tables->domain;
    for (std::size_t i = 0; i < tables->members.size(); ++i) {
        if (tables->members[i] != *self_ep) boot.local_domain_members.insert(tables->members[i]);
        boot.local_capacities[tables->members[i]] = tables->capacities[i];
    }
    for (const auto& [dom, eps] : tables->external)
        boot.external_nodes[dom] = std::set<Endpoint>(eps.begin(), eps.end());

    NodeInfo info{*self_ep, tables->domain, capacity};
    Node node(info, cfg, boot, mix64(seed, fnv1a(self_ep->text())));
    std::set<ServiceName> services;
    {
        std::stringstream ss(services_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) services.insert(item);
    }
    node.set_own_services(services);

    NoopExecutor noop;
    CommandExecutor command(migrate_hook);
    MigrationExecutor& executor =
        migrate_hook.empty() ? static_cast<MigrationExecutor&>(noop) : command;

    struct OneShot {
        double at;
        TimerKind kind;
        std::uint64_t token;
    };
    std::vector<OneShot> oneshots;
    Role last_role = Role::MEMBER;
    std::optional<Endpoint> last_leader;
    std::uint64_t task_counter = 0;

    auto process = [&](Actions&& acts, double now) {
        for (const auto& s : acts.sends) {
            try {
                net.send(s.to, s.msg);
            } catch (const OversizeMessage& e) {
                logline(std::string("send failed: ") + e.what());
            }
        }
        for (const auto& t : acts.timers) oneshots.push_back({now + t.delay, t.kind, t.token});
        for (const auto& d : acts.decisions) {
            const MigrationOutcome outcome = execute_migration(d, executor);
            logline("migrate task=" + d.task_id + " target=" + d.target.text() +
                    (d.tier == MigrationTier::LOCAL ? " tier=local" : " tier=external") +
                    " outcome=" + to_string(outcome));
        }
        for (const auto& r : acts.resolutions)
            logline("resolve qid=" + std::to_string(r.qid) +
                    (r.outcome.provider ? " provider=" + r.outcome.provider->text()
                                        : " notfound"));
        if (acts.elected) logline("self-elected epoch=" + std::to_string(node.epoch()));
        if (node.role() != last_role) {
            last_role = node.role();
            logline(last_role == Role::LEADER ? "role=LEADER" : "role=MEMBER");
        }
        if (node.my_leader() != last_leader) {
            last_leader = node.my_leader();
            logline("leader=" + (last_leader ? last_leader->text() : "unknown"));
        }
    };

    const double t0 = now_seconds();
    process(node.on_start(t0), t0);
    double next_status = t0 + cfg.status_period;
    double next_balance = t0 + cfg.balance_period;
    double next_services = t0 + cfg.status_period * cfg.services_period_multiplier;
    double next_refresh = t0 + cfg.gl_refresh_period;

    while (true) {
        double now = now_seconds();
        if (now >= next_status) {
            process(node.on_status_tick(probe.sample(now), now), now);
            next_status += cfg.status_period;
        }
        if (now >= next_balance) {
            const LoadSample s = probe.sample(now);
            std::optional<TaskDemand> cand;
            if (classify_load(s, cfg.thresholds) == LoadClass::OVERLOADED)
                cand = TaskDemand{"task" + std::to_string(++task_counter), s.cpu_util,
                                  s.ram_util};
            process(node.on_balance_tick(s, cand, now), now);
            next_balance += cfg.balance_period;
        }
        if (now >= next_services) {
            process(node.on_services_tick(now), now);
            next_services += cfg.status_period * cfg.services_period_multiplier;
        }
        if (now >= next_refresh) {
            process(node.on_gl_refresh_tick(now), now);
            next_refresh += cfg.gl_refresh_period;
        }
        for (std::size_t i = 0; i < oneshots.size();) {
            if (oneshots[i].at <= now) {
                OneShot t = oneshots[i];
                oneshots.erase(oneshots.begin() + static_cast<std::ptrdiff_t>(i));
                process(node.on_timer(t.kind, t.token, now), now);
            } else {
                ++i;
            }
        }

        double next = std::min(std::min(next_status, next_balance),
                               std::min(next_services, next_refresh));
        for (const auto& t : oneshots) next = std::min(next, t.at);
        int wait_ms = static_cast<int>((next - now_seconds()) * 1000);
        if (wait_ms < 0) wait_ms = 0;
        if (wait_ms > 200) wait_ms = 200;

        if (auto in = net.poll_once(wait_ms)) {
            now = now_seconds();
            process(node.on_message(in->msg, now), now);
        }
    }
}

// -------------------------------------------------------------- lookup ----

int cmd_lookup(const std::string& via, const std::string& service, const std::string& bind,
               double timeout_s) {
    auto via_ep = parse_endpoint(via);
    if (!via_ep) {
        std::fprintf(stderr, "bad --via endpoint\n");
        return 2;
    }
    if (!valid_name(service)) {
        std::fprintf(stderr, "bad service name\n");
        return 2;
    }

    UdpTransport net;
    std::string err;
    std::string bind_addr = "127.0.0.1";
    std::uint16_t base = 0;
    if (!bind.empty()) {
        auto b = parse_endpoint(bind);
        if (!b) {
            std::fprintf(stderr, "bad --bind endpoint\n");
            return 2;
        }
        bind_addr = b->address();
        base = b->port;
        if (!net.bind(bind_addr, base, err)) {
            std::fprintf(stderr, "%s\n", err.c_str());
            return 1;
        }
    } else {
        // probe for four consecutive free ports
        for (std::uint16_t candidate = 17500; candidate < 17700; candidate += 4) {
            if (net.bind(bind_addr, candidate, err)) {
                base = candidate;
                break;
            }
        }
        if (base == 0) {
            std::fprintf(stderr, "no free port quad found\n");
            return 1;
        }
    }
    Endpoint self;
    self = *parse_endpoint(bind_addr + ":" + std::to_string(base));

    const double deadline = now_seconds() + timeout_s;

    // step 1: who leads the via node's domain? (members relay)
    std::optional<Endpoint> leader;
    double next_probe = 0;
    while (!leader && now_seconds() < deadline) {
        if (now_seconds() >= next_probe) {
            net.send(*via_ep, Message{GlQuery{self}});
            next_probe = now_seconds() + 1.0;
        }
        auto in = net.poll_once(100);
        if (in) {
            if (const auto* r = std::get_if<GlReply>(&in->msg)) leader = r->leader;
        }
    }
    if (!leader) {
        std::fprintf(stderr, "no group leader reply via %s\n", via_ep->text().c_str());
        return 1;
    }

    // step 2: service query to the leader
    const std::uint64_t qid = 1;
    next_probe = 0;
    while (now_seconds() < deadline) {
        if (now_seconds() >= next_probe) {
            net.send(*leader, Message{ServiceQuery{self, service, qid}});
            next_probe = now_seconds() + 2.0;
        }
        auto in = net.poll_once(100);
        if (!in) continue;
        const auto* rep = std::get_if<ServiceReply>(&in->msg);
        if (!rep || rep->qid != qid || rep->service != service) continue;
        if (rep->reason == ReplyReason::NOT_LEADER) {
            std::fprintf(stderr, "%s is not a leader anymore\n", leader->text().c_str());
            return 1;
        }
        if (rep->providers.empty()) {
            std::fprintf(stderr, "service %s not found\n", service.c_str());
            return 3;
        }
        std::printf("%s\n", rep->providers.front().text().c_str());
        return 0;
    }
    std::fprintf(stderr, "lookup timed out\n");
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"domain-partitioned P2P grid: simulator, daemon, admin, lookup"};
    app.require_subcommand(1);
    app.set_config("--config");

    // sim
    auto* sim = app.add_subcommand("sim", "run a scenario in the discrete-event simulator");
    std::string scenario_path, metrics_path, trace_path, baseline = "file";
    std::uint64_t seed_flag = 0;
    bool seed_given = false;
    sim->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--seed", seed_flag, "override the scenario seed")
        ->each([&](const std::string&) { seed_given = true; });
    sim->add_option("--metrics", metrics_path, "write metrics JSON here (plus .series.csv)");
    sim->add_option("--trace", trace_path, "write the event trace here");
    sim->add_option("--baseline", baseline, "flooding baseline: on|off (default: per scenario)")
        ->check(CLI::IsMember({"on", "off", "file"}));

    // node
    auto* nodecmd = app.add_subcommand("node", "run a daemon node over UDP");
    std::string listen, admin_addr, services_csv, migrate_hook;
    double capacity = 1.0;
    std::uint64_t node_seed = env_seed().value_or(1);
    Probe probe;
    NodeConfig cfg;
    cfg.gl_election_timeout = 2.0;  // wall-clock default: 2 seconds
    cfg.ttl = 300.0;
    nodecmd->add_option("--listen", listen, "addr:base_port (binds base..base+3)")->required();
    nodecmd->add_option("--admin", admin_addr, "admin addr:base_port")->required();
    nodecmd->add_option("--services", services_csv, "comma-separated own services");
    nodecmd->add_option("--seed", node_seed, "rng seed (env PGRID_SEED as fallback)");
    nodecmd->add_option("--capacity", capacity, "capacity score reported to the admin");
    nodecmd->add_option("--migrate-hook", migrate_hook,
                        "command run per migration (TARGET_ADDR/TARGET_PORT/TASK_ID in env)");
    nodecmd->add_option("--probe", probe.spec, "load probe: static:cpu,ram or file:path");
    nodecmd->add_option("--status-period", cfg.status_period, "seconds");
    nodecmd->add_option("--balance-period", cfg.balance_period, "seconds");
    nodecmd->add_option("--gl-refresh", cfg.gl_refresh_period, "seconds");
    nodecmd->add_option("--election-timeout", cfg.gl_election_timeout, "seconds");

    // admin
    auto* admincmd = app.add_subcommand("admin", "run the bootstrap admin");
    std::string topology_path, admin_listen;
    int hop_threshold = 3;
    admincmd->add_option("--topology", topology_path, "topology JSON file")->required();
    admincmd->add_option("--hop-threshold", hop_threshold, "domain diameter bound");
    admincmd->add_option("--listen", admin_listen, "addr:base_port")->required();

    // lookup
    auto* lookupcmd = app.add_subcommand("lookup", "resolve a service via a live node");
    std::string via, bind, service;
    double lookup_timeout = 10.0;
    lookupcmd->add_option("--via", via, "any live node, addr:base_port")->required();
    lookupcmd->add_option("--bind", bind, "local addr:base_port for replies");
    lookupcmd->add_option("--timeout", lookup_timeout, "seconds");
    lookupcmd->add_option("service", service, "service name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_sim(scenario_path,
                           seed_given ? std::optional<std::uint64_t>(seed_flag) : std::nullopt,
                           metrics_path, trace_path, baseline);
        if (nodecmd->parsed())
            return cmd_node(listen, admin_addr, services_csv, node_seed, capacity, migrate_hook,
                            probe, cfg);
        if (admincmd->parsed()) return cmd_admin(topology_path, hop_threshold, admin_listen);
        if (lookupcmd->parsed()) return cmd_lookup(via, service, bind, lookup_timeout);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
