#include "pgrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pgrid/rng.hpp"

namespace pgrid {

using nlohmann::json;

std::vector<std::string> Scenario::validate() const {
    std::vector<std::string> d;
    if (topology.nodes.empty()) d.push_back("topology.nodes: empty");
    std::set<Endpoint> eps;
    for (const auto& n : topology.nodes) {
        if (!eps.insert(n.endpoint).second)
            d.push_back("topology.nodes: duplicate endpoint " + n.endpoint.text());
        if (n.capacity_score < 0)
            d.push_back("topology.nodes: negative capacity at " + n.endpoint.text());
    }
    if (!topology.complete()) d.push_back("topology.hops: not all pairs present");
    if (hop_threshold < 1) d.push_back("hop_threshold: must be >= 1");
    if (!node_config.valid()) d.push_back("node_config: invalid (periods/thresholds)");
    if (net.drop_prob < 0 || net.drop_prob >= 1) d.push_back("net.drop_prob: must be in [0,1)");
    if (net.latency_min < 0 || net.latency_min > net.latency_max)
        d.push_back("net: latency_min must be in [0, latency_max]");
    if (horizon <= 0) d.push_back("horizon: must be > 0");

    auto known = [&](const Endpoint& e) { return eps.count(e) > 0; };
    for (const auto& [ep, svcs] : services) {
        if (!known(ep)) d.push_back("services: unknown node " + ep.text());
        for (const auto& s : svcs)
            if (!valid_name(s)) d.push_back("services: bad service name '" + s + "'");
    }
    for (const auto& w : workload) {
        if (!known(w.node)) d.push_back("workload: unknown node " + w.node.text());
        if (w.time < 0 || w.time > horizon) d.push_back("workload: time outside horizon");
        if (w.task.cpu_share < 0 || w.task.cpu_share > 1 || w.task.ram_share < 0 ||
            w.task.ram_share > 1)
            d.push_back("workload: task shares must be in [0,1] (task " + w.task.id + ")");
        if (w.task.duration <= 0) d.push_back("workload: task duration must be > 0");
    }
    for (const auto& l : lookups) {
        if (!known(l.node)) d.push_back("lookups: unknown node " + l.node.text());
        if (l.time < 0 || l.time > horizon) d.push_back("lookups: time outside horizon");
        if (!valid_name(l.service)) d.push_back("lookups: bad service name '" + l.service + "'");
    }
    std::map<Endpoint, std::vector<const ChurnEvent*>> per_node;
    for (const auto& c : churn) {
        if (!known(c.node)) d.push_back("churn: unknown node " + c.node.text());
        if (c.time < 0 || c.time > horizon) d.push_back("churn: time outside horizon");
        per_node[c.node].push_back(&c);
    }
    for (auto& [ep, evs] : per_node) {
        std::stable_sort(evs.begin(), evs.end(),
                         [](const ChurnEvent* a, const ChurnEvent* b) { return a->time < b->time; });
        bool up = true;
        for (const auto* ev : evs) {
            if (ev->up == up) {
                d.push_back("churn: " + ep.text() + (up ? " UP while up" : " DOWN while down"));
                break;
            }
            up = ev->up;
        }
    }
    return d;
}

Topology make_clustered_topology(int domains, int domain_size, std::uint16_t port,
                                 double capacity_lo, double capacity_hi, std::uint64_t seed) {
    Topology topo;
    DetRng rng(mix64(seed, fnv1a("topology")));
    const int n = domains * domain_size;
    std::vector<Endpoint> eps;
    for (int c = 0; c < domains; ++c) {
        for (int i = 0; i < domain_size; ++i) {
            Endpoint ep;
            ep.octets = {10, static_cast<std::uint8_t>(c + 1), static_cast<std::uint8_t>(i / 250),
                         static_cast<std::uint8_t>(i % 250 + 1)};
            ep.port = port;
            double cap = capacity_lo + (capacity_hi - capacity_lo) * rng.real01();
            cap = std::round(cap * 100.0) / 100.0;
            topo.nodes.push_back({ep, "", cap});
            eps.push_back(ep);
        }
    }
    // adjacency: clique per cluster, ring of gateways (node 0 of each)
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    auto link = [&](int a, int b) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    };
    for (int c = 0; c < domains; ++c)
        for (int i = 0; i < domain_size; ++i)
            for (int j = i + 1; j < domain_size; ++j)
                link(c * domain_size + i, c * domain_size + j);
    if (domains > 1)
        for (int c = 0; c < domains; ++c) {
            int next = (c + 1) % domains;
            if (domains == 2 && c == 1) break;  // avoid the duplicate edge
            link(c * domain_size, next * domain_size);
        }
    // hop counts = BFS distance
    for (int s = 0; s < n; ++s) {
        std::vector<int> dist(static_cast<std::size_t>(n), -1);
        std::deque<int> q{s};
        dist[static_cast<std::size_t>(s)] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int v : adj[static_cast<std::size_t>(u)])
                if (dist[static_cast<std::size_t>(v)] < 0) {
                    dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                    q.push_back(v);
                }
        }
        for (int t = s + 1; t < n; ++t)
            topo.set_hop(eps[static_cast<std::size_t>(s)], eps[static_cast<std::size_t>(t)],
                         dist[static_cast<std::size_t>(t)]);
    }
    return topo;
}

namespace {

std::optional<Endpoint> ep_field(const json& j, const char* ctx,
                                 std::vector<std::string>& diag) {
    if (!j.is_string()) {
        diag.push_back(std::string(ctx) + ": expected \"addr:port\" string");
        return std::nullopt;
    }
    auto ep = parse_endpoint(j.get<std::string>());
    if (!ep) diag.push_back(std::string(ctx) + ": bad endpoint '" + j.get<std::string>() + "'");
    return ep;
}

bool num_field(const json& j, const char* key, double& out, std::vector<std::string>& diag,
               const char* ctx) {
    if (!j.contains(key)) return false;
    if (!j[key].is_number()) {
        diag.push_back(std::string(ctx) + "." + key + ": expected number");
        return false;
    }
    out = j[key].get<double>();
    return true;
}

void parse_node_config(const json& j, NodeConfig& cfg, std::vector<std::string>& diag) {
    num_field(j, "status_period", cfg.status_period, diag, "node_config");
    num_field(j, "balance_period", cfg.balance_period, diag, "node_config");
    num_field(j, "gl_refresh_period", cfg.gl_refresh_period, diag, "node_config");
    num_field(j, "services_period_multiplier", cfg.services_period_multiplier, diag,
              "node_config");
    num_field(j, "gl_election_timeout", cfg.gl_election_timeout, diag, "node_config");
    num_field(j, "query_timeout", cfg.query_timeout, diag, "node_config");
    num_field(j, "ext_reply_timeout", cfg.ext_reply_timeout, diag, "node_config");
    num_field(j, "ttl", cfg.ttl, diag, "node_config");
    double v;
    if (num_field(j, "gossip_fanout_k", v, diag, "node_config"))
        cfg.gossip_fanout_k = static_cast<std::size_t>(v);
    if (num_field(j, "reply_sample_size", v, diag, "node_config"))
        cfg.reply_sample_size = static_cast<std::size_t>(v);
    if (j.contains("balancing_enabled")) {
        if (j["balancing_enabled"].is_boolean())
            cfg.balancing_enabled = j["balancing_enabled"].get<bool>();
        else
            diag.push_back("node_config.balancing_enabled: expected bool");
    }
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        num_field(t, "under_cpu", cfg.thresholds.under_cpu, diag, "node_config.thresholds");
        num_field(t, "under_ram", cfg.thresholds.under_ram, diag, "node_config.thresholds");
        num_field(t, "over_cpu", cfg.thresholds.over_cpu, diag, "node_config.thresholds");
        num_field(t, "over_ram", cfg.thresholds.over_ram, diag, "node_config.thresholds");
    }
}

void parse_topology(const json& j, Scenario& sc, std::vector<std::string>& diag) {
    if (j.contains("generate")) {
        const auto& g = j["generate"];
        double domains = 0, size = 0, port = 7400;
        if (!num_field(g, "domains", domains, diag, "topology.generate") ||
            !num_field(g, "domain_size", size, diag, "topology.generate")) {
            diag.push_back("topology.generate: needs domains and domain_size");
            return;
        }
        num_field(g, "port", port, diag, "topology.generate");
        double lo = 4.0, hi = 9.0;
        if (g.contains("capacity") && g["capacity"].is_array() && g["capacity"].size() == 2) {
            lo = g["capacity"][0].get<double>();
            hi = g["capacity"][1].get<double>();
        }
        sc.topology = make_clustered_topology(static_cast<int>(domains), static_cast<int>(size),
                                              static_cast<std::uint16_t>(port), lo, hi, sc.seed);
        return;
    }
    if (!j.contains("nodes") || !j["nodes"].is_array()) {
        diag.push_back("topology.nodes: missing or not an array");
        return;
    }
    for (const auto& nj : j["nodes"]) {
        if (!nj.is_object() || !nj.contains("address") || !nj.contains("port")) {
            diag.push_back("topology.nodes: each node needs address and port");
            continue;
        }
        std::string addr = nj["address"].is_string() ? nj["address"].get<std::string>() : "";
        auto ep = parse_endpoint(addr + ":" + std::to_string(nj["port"].get<int>()));
        if (!ep) {
            diag.push_back("topology.nodes: bad endpoint " + addr);
            continue;
        }
        double cap = 1.0;
        num_field(nj, "capacity", cap, diag, "topology.nodes");
        sc.topology.nodes.push_back({*ep, "", cap});
    }
    if (j.contains("hops")) {
        if (!j["hops"].is_array()) {
            diag.push_back("topology.hops: expected array of [a, b, count]");
        } else {
            for (const auto& h : j["hops"]) {
                if (!h.is_array() || h.size() != 3) {
                    diag.push_back("topology.hops: expected [a, b, count]");
                    continue;
                }
                auto a = ep_field(h[0], "topology.hops", diag);
                auto b = ep_field(h[1], "topology.hops", diag);
                if (!a || !b || !h[2].is_number()) continue;
                sc.topology.set_hop(*a, *b, h[2].get<int>());
            }
        }
    }
    if (j.contains("default_hop") && j["default_hop"].is_number()) {
        const int dflt = j["default_hop"].get<int>();
        for (std::size_t i = 0; i < sc.topology.nodes.size(); ++i)
            for (std::size_t k = i + 1; k < sc.topology.nodes.size(); ++k) {
                const auto& a = sc.topology.nodes[i].endpoint;
                const auto& b = sc.topology.nodes[k].endpoint;
                if (sc.topology.hop_of(a, b) < 0) sc.topology.set_hop(a, b, dflt);
            }
    }
}

std::vector<Endpoint> sorted_endpoints(const Topology& t) {
    std::vector<Endpoint> eps;
    for (const auto& n : t.nodes) eps.push_back(n.endpoint);
    std::sort(eps.begin(), eps.end());
    return eps;
}

void generate_services(const json& g, Scenario& sc, DetRng& rng,
                       std::vector<std::string>& diag) {
    double pool = 10, per_node = 0;
    num_field(g, "pool", pool, diag, "services.generate");
    num_field(g, "providers_per_service", per_node, diag, "services.generate");
    std::size_t providers = per_node > 0 ? static_cast<std::size_t>(per_node) : 2;
    std::string prefix = "SERV";
    if (g.contains("prefix") && g["prefix"].is_string()) prefix = g["prefix"].get<std::string>();
    const bool single_domain = !g.contains("single_domain") || g["single_domain"].get<bool>();

    const auto assignment = assign_domains(sc.topology, sc.hop_threshold);
    std::map<DomainName, std::vector<Endpoint>> by_domain;
    for (const auto& ep : sorted_endpoints(sc.topology))
        by_domain[assignment.at(ep)].push_back(ep);
    std::vector<DomainName> domains;
    for (const auto& [d, eps] : by_domain) domains.push_back(d);

    for (int s = 0; s < static_cast<int>(pool); ++s) {
        const ServiceName name = prefix + std::to_string(s + 1);
        if (single_domain) {
            const auto& dom = domains[rng.index(domains.size())];
            auto picks = rng.sample_k(by_domain[dom], providers);
            for (const auto& ep : picks) sc.services[ep].insert(name);
        } else {
            auto picks = rng.sample_k(sorted_endpoints(sc.topology), providers);
            for (const auto& ep : picks) sc.services[ep].insert(name);
        }
    }
}

void generate_workload(const json& g, Scenario& sc, DetRng& rng,
                       std::vector<std::string>& diag) {
    double tasks = 40, t0 = 10, t1 = sc.horizon * 0.6;
    num_field(g, "tasks", tasks, diag, "workload.generate");
    if (g.contains("window") && g["window"].is_array() && g["window"].size() == 2) {
        t0 = g["window"][0].get<double>();
        t1 = g["window"][1].get<double>();
    }
    double hot_fraction = 0.25, hot_weight = 0.6;
    num_field(g, "hot_fraction", hot_fraction, diag, "workload.generate");
    num_field(g, "hot_weight", hot_weight, diag, "workload.generate");

    struct Class {
        double cpu, ram, dur_lo, dur_hi;
    };
    std::vector<Class> classes = {{0.30, 0.06, 20, 60}, {0.06, 0.30, 20, 60},
                                  {0.16, 0.16, 20, 60}};
    if (g.contains("classes") && g["classes"].is_array() && !g["classes"].empty()) {
        classes.clear();
        for (const auto& cj : g["classes"]) {
            Class c{0.2, 0.2, 20, 60};
            num_field(cj, "cpu", c.cpu, diag, "workload.generate.classes");
            num_field(cj, "ram", c.ram, diag, "workload.generate.classes");
            double dur = 0;
            if (num_field(cj, "duration", dur, diag, "workload.generate.classes")) {
                c.dur_lo = c.dur_hi = dur;
            }
            classes.push_back(c);
        }
    }
    auto eps = sorted_endpoints(sc.topology);
    const std::size_t hot_n =
        std::max<std::size_t>(1, static_cast<std::size_t>(hot_fraction * eps.size()));
    auto hot = rng.sample_k(eps, hot_n);

    for (int i = 0; i < static_cast<int>(tasks); ++i) {
        WorkloadEvent w;
        w.time = t0 + (t1 - t0) * rng.real01();
        const bool on_hot = rng.real01() < hot_weight;
        w.node = on_hot ? hot[rng.index(hot.size())] : eps[rng.index(eps.size())];
        const auto& c = classes[rng.index(classes.size())];
        w.task.id = "t" + std::to_string(i + 1);
        w.task.cpu_share = c.cpu;
        w.task.ram_share = c.ram;
        w.task.duration = c.dur_lo + (c.dur_hi - c.dur_lo) * rng.real01();
        sc.workload.push_back(w);
    }
    std::stable_sort(sc.workload.begin(), sc.workload.end(),
                     [](const WorkloadEvent& a, const WorkloadEvent& b) { return a.time < b.time; });
}

void generate_lookups(const json& g, Scenario& sc, DetRng& rng,
                      std::vector<std::string>& diag) {
    double count = 20, t0 = sc.horizon * 0.4, t1 = sc.horizon * 0.9;
    num_field(g, "count", count, diag, "lookups.generate");
    if (g.contains("window") && g["window"].is_array() && g["window"].size() == 2) {
        t0 = g["window"][0].get<double>();
        t1 = g["window"][1].get<double>();
    }
    std::set<ServiceName> pool_set;
    for (const auto& [ep, svcs] : sc.services) pool_set.insert(svcs.begin(), svcs.end());
    std::vector<ServiceName> pool(pool_set.begin(), pool_set.end());
    if (pool.empty()) {
        diag.push_back("lookups.generate: no services defined");
        return;
    }
    auto eps = sorted_endpoints(sc.topology);
    for (int i = 0; i < static_cast<int>(count); ++i) {
        LookupEvent l;
        l.time = t0 + (t1 - t0) * rng.real01();
        l.node = eps[rng.index(eps.size())];
        l.service = pool[rng.index(pool.size())];
        sc.lookups.push_back(l);
    }
    std::stable_sort(sc.lookups.begin(), sc.lookups.end(),
                     [](const LookupEvent& a, const LookupEvent& b) { return a.time < b.time; });
}

void generate_churn(const json& g, Scenario& sc, DetRng& rng, std::vector<std::string>& diag) {
    double events = 4, t0 = 10, t1 = sc.horizon * 0.5, down_lo = 2, down_hi = 8;
    num_field(g, "events", events, diag, "churn.generate");
    if (g.contains("window") && g["window"].is_array() && g["window"].size() == 2) {
        t0 = g["window"][0].get<double>();
        t1 = g["window"][1].get<double>();
    }
    num_field(g, "min_down", down_lo, diag, "churn.generate");
    num_field(g, "max_down", down_hi, diag, "churn.generate");
    auto eps = sorted_endpoints(sc.topology);
    // every DOWN gets a matching UP inside the window: restarts, not deaths
    auto victims = rng.sample_k(eps, static_cast<std::size_t>(events));
    for (const auto& ep : victims) {
        const double down_at = t0 + (t1 - t0) * rng.real01();
        const double dur = down_lo + (down_hi - down_lo) * rng.real01();
        sc.churn.push_back({down_at, ep, false});
        sc.churn.push_back({std::min(down_at + dur, t1 + down_hi), ep, true});
    }
    std::stable_sort(sc.churn.begin(), sc.churn.end(),
                     [](const ChurnEvent& a, const ChurnEvent& b) { return a.time < b.time; });
}

}  // namespace

std::optional<Scenario> load_scenario(const std::string& text,
                                      std::vector<std::string>& diag) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        diag.push_back("document: not valid JSON");
        return std::nullopt;
    }
    Scenario sc;
    if (j.contains("seed") && j["seed"].is_number())
        sc.seed = j["seed"].get<std::uint64_t>();
    double v;
    if (num_field(j, "hop_threshold", v, diag, "")) sc.hop_threshold = static_cast<int>(v);
    num_field(j, "horizon", sc.horizon, diag, "");
    if (j.contains("baseline") && j["baseline"].is_boolean())
        sc.baseline = j["baseline"].get<bool>();
    if (j.contains("net")) {
        num_field(j["net"], "latency_min", sc.net.latency_min, diag, "net");
        num_field(j["net"], "latency_max", sc.net.latency_max, diag, "net");
        num_field(j["net"], "drop_prob", sc.net.drop_prob, diag, "net");
    }
    if (j.contains("node_config")) parse_node_config(j["node_config"], sc.node_config, diag);
    if (!j.contains("topology") || !j["topology"].is_object()) {
        diag.push_back("topology: missing");
        return std::nullopt;
    }
    parse_topology(j["topology"], sc, diag);

    DetRng gen(mix64(sc.seed, fnv1a("generate")));

    if (j.contains("services")) {
        const auto& sj = j["services"];
        if (sj.is_object() && sj.contains("generate")) {
            generate_services(sj["generate"], sc, gen, diag);
        } else if (sj.is_object()) {
            for (auto it = sj.begin(); it != sj.end(); ++it) {
                auto ep = parse_endpoint(it.key());
                if (!ep) {
                    diag.push_back("services: bad endpoint key '" + it.key() + "'");
                    continue;
                }
                if (!it.value().is_array()) {
                    diag.push_back("services: expected array for " + it.key());
                    continue;
                }
                for (const auto& s : it.value())
                    if (s.is_string()) sc.services[*ep].insert(s.get<std::string>());
            }
        } else {
            diag.push_back("services: expected object");
        }
    }

    auto section = [&](const char* key) -> const json* {
        if (!j.contains(key)) return nullptr;
        return &j[key];
    };

    if (const json* w = section("workload")) {
        if (w->is_object() && w->contains("generate")) {
            generate_workload((*w)["generate"], sc, gen, diag);
        } else if (w->is_array()) {
            int auto_id = 0;
            for (const auto& wj : *w) {
                WorkloadEvent ev;
                num_field(wj, "time", ev.time, diag, "workload");
                if (wj.contains("node")) {
                    if (auto ep = ep_field(wj["node"], "workload.node", diag)) ev.node = *ep;
                }
                if (wj.contains("task") && wj["task"].is_object()) {
                    const auto& t = wj["task"];
                    ev.task.id = t.contains("id") && t["id"].is_string()
                                     ? t["id"].get<std::string>()
                                     : "t" + std::to_string(++auto_id);
                    num_field(t, "cpu", ev.task.cpu_share, diag, "workload.task");
                    num_field(t, "ram", ev.task.ram_share, diag, "workload.task");
                    num_field(t, "duration", ev.task.duration, diag, "workload.task");
                } else {
                    diag.push_back("workload: entry missing task object");
                }
                sc.workload.push_back(ev);
            }
        } else {
            diag.push_back("workload: expected array or generate object");
        }
    }

    if (const json* l = section("lookups")) {
        if (l->is_object() && l->contains("generate")) {
            generate_lookups((*l)["generate"], sc, gen, diag);
        } else if (l->is_array()) {
            for (const auto& lj : *l) {
                LookupEvent ev;
                num_field(lj, "time", ev.time, diag, "lookups");
                if (lj.contains("node")) {
                    if (auto ep = ep_field(lj["node"], "lookups.node", diag)) ev.node = *ep;
                }
                if (lj.contains("service") && lj["service"].is_string())
                    ev.service = lj["service"].get<std::string>();
                sc.lookups.push_back(ev);
            }
        } else {
            diag.push_back("lookups: expected array or generate object");
        }
    }

    if (const json* c = section("churn")) {
        if (c->is_object() && c->contains("generate")) {
            generate_churn((*c)["generate"], sc, gen, diag);
        } else if (c->is_array()) {
            for (const auto& cj : *c) {
                ChurnEvent ev;
                num_field(cj, "time", ev.time, diag, "churn");
                if (cj.contains("node")) {
                    if (auto ep = ep_field(cj["node"], "churn.node", diag)) ev.node = *ep;
                }
                if (cj.contains("event") && cj["event"].is_string()) {
                    const std::string e = cj["event"].get<std::string>();
                    if (e == "UP")
                        ev.up = true;
                    else if (e == "DOWN")
                        ev.up = false;
                    else
                        diag.push_back("churn: event must be UP or DOWN");
                }
                sc.churn.push_back(ev);
            }
        } else {
            diag.push_back("churn: expected array or generate object");
        }
    }

    auto more = sc.validate();
    diag.insert(diag.end(), more.begin(), more.end());
    if (!diag.empty()) return std::nullopt;
    return sc;
}

std::optional<Scenario> load_scenario_file(const std::string& path,
                                           std::vector<std::string>& diag) {
    std::ifstream in(path);
    if (!in) {
        diag.push_back("cannot open scenario file: " + path);
        return std::nullopt;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str(), diag);
}

std::optional<Topology> load_topology_file(const std::string& path,
                                           std::vector<std::string>& diag) {
    std::ifstream in(path);
    if (!in) {
        diag.push_back("cannot open topology file: " + path);
        return std::nullopt;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        diag.push_back("document: not valid JSON");
        return std::nullopt;
    }
    Scenario sc;
    if (j.contains("seed") && j["seed"].is_number()) sc.seed = j["seed"].get<std::uint64_t>();
    parse_topology(j, sc, diag);
    std::set<Endpoint> eps;
    for (const auto& n : sc.topology.nodes)
        if (!eps.insert(n.endpoint).second)
            diag.push_back("topology.nodes: duplicate endpoint " + n.endpoint.text());
    if (sc.topology.nodes.empty()) diag.push_back("topology.nodes: empty");
    if (!sc.topology.complete()) diag.push_back("topology.hops: not all pairs present");
    if (!diag.empty()) return std::nullopt;
    return sc.topology;
}

}  // namespace pgrid
