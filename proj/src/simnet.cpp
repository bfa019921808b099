#include "pgrid/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "pgrid/codec.hpp"

namespace pgrid {

namespace {

const char* tick_name(LoadClass c) { return to_string(c); }

std::uint64_t msg_qid(const Message& m) {
    if (const auto* q = std::get_if<ServiceQuery>(&m)) return q->qid;
    if (const auto* f = std::get_if<ServiceFwd>(&m)) return f->qid;
    if (const auto* r = std::get_if<ServiceReply>(&m)) return r->qid;
    return 0;
}

}  // namespace

SimNet::SimNet(Scenario scenario)
    : sc_(std::move(scenario)),
      assignment_(assign_domains(sc_.topology, sc_.hop_threshold)),
      net_rng_(mix64(sc_.seed, fnv1a("net"))) {
    for (const auto& [ep, dom] : assignment_) ++domain_sizes_[dom];

    // bootstrap tables are config-driven in simulation: every node knows its
    // full domain membership and a fixed sample of each foreign domain
    std::map<DomainName, std::vector<Endpoint>> by_domain;
    for (const auto& [ep, dom] : assignment_) by_domain[dom].push_back(ep);  // sorted

    std::vector<Endpoint> order;
    for (const auto& [ep, dom] : assignment_) order.push_back(ep);

    std::uint64_t index = 0;
    for (const auto& ep : order) {
        SimNode sn;
        const NodeInfo* info = *sc_.topology.find(ep);
        sn.info = *info;
        sn.info.domain = assignment_.at(ep);
        sn.qid_base = (index + 1) * 1000000;
        ++index;

        BootstrapTables boot;
        boot.domain = sn.info.domain;
        for (const auto& peer : by_domain[boot.domain]) {
            if (peer != ep) boot.local_domain_members.insert(peer);
            boot.local_capacities[peer] = (*sc_.topology.find(peer))->capacity_score;
        }
        for (const auto& [dom, members] : by_domain) {
            if (dom == boot.domain) continue;
            std::set<Endpoint> sample;
            for (const auto& peer : members) {
                sample.insert(peer);
                if (sample.size() >= Admin::kExtSampleSize) break;
            }
            boot.external_nodes[dom] = sample;
        }
        sn.boot = boot;
        nodes_.emplace(ep, std::move(sn));
    }

    // scenario events
    for (const auto& w : sc_.workload) {
        Ev ev;
        ev.kind = Ek::TASK_START;
        ev.node = w.node;
        ev.task = w.task;
        schedule(w.time, std::move(ev));
    }
    std::size_t idx = 0;
    for (const auto& l : sc_.lookups) {
        Ev ev;
        ev.kind = Ek::LOOKUP;
        ev.node = l.node;
        ev.service = l.service;
        ev.lookup_idx = idx++;
        schedule(l.time, std::move(ev));
    }
    metrics_.per_lookup_messages.assign(sc_.lookups.size(), 0);
    if (sc_.baseline) metrics_.per_lookup_flooding.assign(sc_.lookups.size(), 0);
    for (const auto& c : sc_.churn) {
        Ev ev;
        ev.kind = Ek::CHURN;
        ev.node = c.node;
        ev.up = c.up;
        schedule(c.time, std::move(ev));
    }
    for (double t = 1.0; t <= sc_.horizon; t += 1.0) {
        Ev ev;
        ev.kind = Ek::SAMPLE;
        schedule(t, std::move(ev));
    }
}

void SimNet::schedule(double t, Ev ev) {
    ev.t = t;
    ev.seq = seq_++;
    queue_.push(std::move(ev));
}

LoadSample SimNet::probe_of(const SimNode& sn, double now) const {
    double cpu = 0.0, ram = 0.0;
    for (const auto& [id, task] : sn.tasks) {
        cpu += task.cpu_share;
        ram += task.ram_share;
    }
    return {std::min(1.0, cpu), std::min(1.0, ram), now};
}

// The task we would hand off when overloaded: the largest combined demand,
// ties broken by id.
std::optional<TaskDemand> SimNet::migration_candidate(const SimNode& sn) const {
    const Task* best = nullptr;
    for (const auto& [id, task] : sn.tasks) {
        if (!best || task.cpu_share + task.ram_share > best->cpu_share + best->ram_share)
            best = &task;
    }
    if (!best) return std::nullopt;
    return TaskDemand{best->id, best->cpu_share, best->ram_share};
}

void SimNet::schedule_ticks(const Endpoint& ep, double from_t) {
    const auto& sn = nodes_.at(ep);
    const NodeConfig& cfg = sc_.node_config;
    auto arm = [&](Ek kind, double period) {
        Ev ev;
        ev.kind = kind;
        ev.node = ep;
        ev.to_inc = sn.inc;
        schedule(from_t + period, std::move(ev));
    };
    arm(Ek::TICK_STATUS, cfg.status_period);
    arm(Ek::TICK_BALANCE, cfg.balance_period);
    arm(Ek::TICK_SERVICES, cfg.status_period * cfg.services_period_multiplier);
    arm(Ek::TICK_REFRESH, cfg.gl_refresh_period);
}

void SimNet::boot_node(SimNode& sn, double now) {
    const std::uint64_t seed =
        mix64(mix64(sc_.seed, fnv1a(sn.info.endpoint.text())), sn.inc);
    sn.node = std::make_unique<Node>(sn.info, sc_.node_config, sn.boot, seed, sn.qid_base);
    auto it = sc_.services.find(sn.info.endpoint);
    if (it != sc_.services.end()) sn.node->set_own_services(it->second);
    process_actions(sn.info.endpoint, sn.node->on_start(now), now);
    schedule_ticks(sn.info.endpoint, now);
}

void SimNet::run() {
    if (ran_) return;
    ran_ = true;
    for (auto& [ep, sn] : nodes_) boot_node(sn, 0.0);

    while (!queue_.empty()) {
        Ev ev = queue_.top();
        if (ev.t > sc_.horizon) break;
        queue_.pop();
        now_ = ev.t;
        handle_event(ev);
    }

    metrics_.messages_total = 0;
    for (const auto& [k, v] : metrics_.messages_by_type) metrics_.messages_total += v;
    if (!metrics_.load_stddev_series.empty()) {
        double sum = 0;
        for (double v : metrics_.load_stddev_series) sum += v;
        metrics_.load_stddev_time_avg =
            sum / static_cast<double>(metrics_.load_stddev_series.size());
    }
    for (std::uint64_t v : metrics_.per_lookup_flooding) metrics_.flooding_messages_total += v;
    double hier_sum = 0, flood_sum = 0;
    std::size_t hier_n = 0, flood_n = 0;
    for (std::size_t i = 0; i < metrics_.per_lookup_messages.size(); ++i) {
        if (metrics_.per_lookup_messages[i] == 0) continue;  // resolved without protocol traffic
        hier_sum += static_cast<double>(metrics_.per_lookup_messages[i]);
        ++hier_n;
        if (i < metrics_.per_lookup_flooding.size()) {
            flood_sum += static_cast<double>(metrics_.per_lookup_flooding[i]);
            ++flood_n;
        }
    }
    if (hier_n) metrics_.lookup_messages_mean = hier_sum / static_cast<double>(hier_n);
    if (flood_n) metrics_.flooding_messages_mean = flood_sum / static_cast<double>(flood_n);
    if (metrics_.flooding_messages_mean > 0)
        metrics_.traffic_ratio = metrics_.lookup_messages_mean / metrics_.flooding_messages_mean;
}

void SimNet::process_actions(const Endpoint& from, Actions&& acts, double now) {
    auto& sender = nodes_.at(from);
    if (acts.elected) {
        ++metrics_.leader_elections;
        TraceEvent te;
        te.kind = TraceEvent::Kind::ELECT;
        te.t = now;
        te.a = from;
        te.detail = "epoch=" + std::to_string(sender.node->epoch());
        trace_.push_back(te);
    }
    for (const auto& send : acts.sends) {
        const char* token = type_token(send.msg);
        ++metrics_.messages_by_type[token];
        const std::uint64_t q = msg_qid(send.msg);
        if (q) {
            auto it = qid_lookup_.find(q);
            if (it != qid_lookup_.end()) ++metrics_.per_lookup_messages[it->second];
        }
        TraceEvent te;
        te.kind = TraceEvent::Kind::SEND;
        te.t = now;
        te.a = from;
        te.b = send.to;
        te.type = token;
        te.qid = q;
        trace_.push_back(te);

        if (sc_.net.drop_prob > 0 && net_rng_.real01() < sc_.net.drop_prob) {
            ++metrics_.dropped_network;
            TraceEvent td = te;
            td.kind = TraceEvent::Kind::DROP;
            td.detail = "loss";
            trace_.push_back(td);
            continue;
        }
        const double latency = net_rng_.uniform(sc_.net.latency_min, sc_.net.latency_max);
        // same sender, same receiver: deliveries keep send order
        auto key = std::make_pair(from, send.to);
        double at = now + latency;
        auto fit = fifo_.find(key);
        if (fit != fifo_.end() && fit->second > at) at = fit->second;
        fifo_[key] = at;

        auto dit = nodes_.find(send.to);
        Ev ev;
        ev.kind = Ek::DELIVER;
        ev.node = send.to;
        ev.from = from;
        ev.msg = send.msg;
        ev.from_inc = sender.inc;
        ev.to_inc = dit == nodes_.end() ? 0 : dit->second.inc;
        schedule(at, std::move(ev));
    }
    for (const auto& timer : acts.timers) {
        Ev ev;
        ev.kind = Ek::ONESHOT;
        ev.node = from;
        ev.timer = timer.kind;
        ev.token = timer.token;
        ev.to_inc = sender.inc;
        schedule(now + timer.delay, std::move(ev));
    }
    for (const auto& d : acts.decisions) execute_decision(from, d, now);
    for (const auto& r : acts.resolutions) finalize_resolution(from, r, now);
}

void SimNet::finalize_resolution(const Endpoint& ep, const ResolutionEvent& rev, double now) {
    const Resolution& r = rev.outcome;
    TraceEvent te;
    te.kind = TraceEvent::Kind::RESOLVE;
    te.t = now;
    te.a = ep;
    te.qid = rev.qid;
    switch (r.kind) {
        case Resolution::Kind::LOCAL:
            te.type = "local";
            ++metrics_.lookup_outcomes.local;
            break;
        case Resolution::Kind::DOMAIN:
            te.type = "domain";
            ++metrics_.lookup_outcomes.domain;
            break;
        case Resolution::Kind::REMOTE:
            te.type = "remote";
            ++metrics_.lookup_outcomes.remote;
            break;
        case Resolution::Kind::NOT_FOUND:
            te.type = "notfound";
            ++metrics_.lookup_outcomes.notfound;
            break;
        case Resolution::Kind::PENDING: te.type = "pending"; break;
    }
    if (r.provider) te.detail = "provider=" + r.provider->text();
    trace_.push_back(te);
}

double SimNet::total_demand() const {
    double sum = 0;
    for (const auto& [ep, sn] : nodes_)
        for (const auto& [id, task] : sn.tasks) sum += task.cpu_share + task.ram_share;
    return sum;
}

void SimNet::execute_decision(const Endpoint& source, const MigrationDecision& d, double now) {
    ++metrics_.migrations.attempted;
    auto& src = nodes_.at(source);
    TraceEvent te;
    te.kind = TraceEvent::Kind::MIGRATE;
    te.t = now;
    te.a = source;
    te.b = d.target;
    te.detail = std::string("task=") + d.task_id +
                (d.tier == MigrationTier::LOCAL ? " tier=local" : " tier=external");

    auto tit = src.tasks.find(d.task_id);
    auto nit = nodes_.find(d.target);
    if (tit == src.tasks.end() || nit == nodes_.end()) {
        ++metrics_.migrations.failed;
        te.type = "failed";
        trace_.push_back(te);
        return;
    }
    auto& dst = nit->second;
    const bool refused =
        !dst.online ||
        classify_load(probe_of(dst, now), sc_.node_config.thresholds) == LoadClass::OVERLOADED;
    if (refused) {
        ++metrics_.migrations.failed;
        te.type = "refused";
        trace_.push_back(te);
        return;
    }
    const double before = total_demand();
    Task task = tit->second;
    src.tasks.erase(tit);
    dst.tasks[task.id] = task;
    if (std::abs(total_demand() - before) > 1e-9) ++metrics_.conservation_violations;
    ++metrics_.migrations.succeeded;
    te.type = "ok";
    trace_.push_back(te);
}

void SimNet::handle_event(const Ev& ev) {
    switch (ev.kind) {
        case Ek::DELIVER: {
            auto it = nodes_.find(ev.node);
            auto fit = nodes_.find(ev.from);
            const bool from_ok = fit != nodes_.end() && fit->second.inc == ev.from_inc;
            const bool to_ok =
                it != nodes_.end() && it->second.online && it->second.inc == ev.to_inc;
            TraceEvent te;
            te.t = now_;
            te.a = ev.node;
            te.b = ev.from;
            te.type = type_token(ev.msg);
            te.qid = msg_qid(ev.msg);
            if (!from_ok || !to_ok) {
                ++metrics_.dropped_churn;
                te.kind = TraceEvent::Kind::DROP;
                te.detail = "churn";
                trace_.push_back(te);
                return;
            }
            te.kind = TraceEvent::Kind::DELIVER;
            trace_.push_back(te);
            process_actions(ev.node, it->second.node->on_message(ev.msg, now_), now_);
            return;
        }
        case Ek::TICK_STATUS: {
            auto& sn = nodes_.at(ev.node);
            if (!sn.online || sn.inc != ev.to_inc) return;
            const LoadClass before = sn.node->last_class();
            Actions acts = sn.node->on_status_tick(probe_of(sn, now_), now_);
            if (sn.node->last_class() != before) {
                TraceEvent te;
                te.kind = TraceEvent::Kind::CLASS_CHANGE;
                te.t = now_;
                te.a = ev.node;
                te.type = tick_name(sn.node->last_class());
                trace_.push_back(te);
            }
            process_actions(ev.node, std::move(acts), now_);
            Ev next;
            next.kind = Ek::TICK_STATUS;
            next.node = ev.node;
            next.to_inc = sn.inc;
            schedule(now_ + sc_.node_config.status_period, std::move(next));
            return;
        }
        case Ek::TICK_BALANCE: {
            auto& sn = nodes_.at(ev.node);
            if (!sn.online || sn.inc != ev.to_inc) return;
            process_actions(
                ev.node,
                sn.node->on_balance_tick(probe_of(sn, now_), migration_candidate(sn), now_),
                now_);
            Ev next;
            next.kind = Ek::TICK_BALANCE;
            next.node = ev.node;
            next.to_inc = sn.inc;
            schedule(now_ + sc_.node_config.balance_period, std::move(next));
            return;
        }
        case Ek::TICK_SERVICES: {
            auto& sn = nodes_.at(ev.node);
            if (!sn.online || sn.inc != ev.to_inc) return;
            process_actions(ev.node, sn.node->on_services_tick(now_), now_);
            Ev next;
            next.kind = Ek::TICK_SERVICES;
            next.node = ev.node;
            next.to_inc = sn.inc;
            schedule(now_ + sc_.node_config.status_period * sc_.node_config.services_period_multiplier,
                     std::move(next));
            return;
        }
        case Ek::TICK_REFRESH: {
            auto& sn = nodes_.at(ev.node);
            if (!sn.online || sn.inc != ev.to_inc) return;
            process_actions(ev.node, sn.node->on_gl_refresh_tick(now_), now_);
            Ev next;
            next.kind = Ek::TICK_REFRESH;
            next.node = ev.node;
            next.to_inc = sn.inc;
            schedule(now_ + sc_.node_config.gl_refresh_period, std::move(next));
            return;
        }
        case Ek::ONESHOT: {
            auto& sn = nodes_.at(ev.node);
            if (!sn.online || sn.inc != ev.to_inc) return;
            process_actions(ev.node, sn.node->on_timer(ev.timer, ev.token, now_), now_);
            return;
        }
        case Ek::TASK_START: {
            auto& sn = nodes_.at(ev.node);
            sn.tasks[ev.task.id] = ev.task;
            Ev end;
            end.kind = Ek::TASK_END;
            end.task_id = ev.task.id;
            schedule(now_ + ev.task.duration, std::move(end));
            return;
        }
        case Ek::TASK_END: {
            for (auto& [ep, sn] : nodes_) {
                auto tit = sn.tasks.find(ev.task_id);
                if (tit != sn.tasks.end()) {
                    sn.tasks.erase(tit);
                    return;
                }
            }
            return;
        }
        case Ek::LOOKUP: {
            auto& sn = nodes_.at(ev.node);
            TraceEvent te;
            te.kind = TraceEvent::Kind::LOOKUP;
            te.t = now_;
            te.a = ev.node;
            te.type = ev.service;
            trace_.push_back(te);
            if (sc_.baseline) {
                const FloodResult fr = resolve_service_flooding(ev.node, ev.service);
                metrics_.per_lookup_flooding[ev.lookup_idx] = fr.messages;
            }
            if (!sn.online) {
                ResolutionEvent rev;
                rev.outcome.kind = Resolution::Kind::NOT_FOUND;
                finalize_resolution(ev.node, rev, now_);
                return;
            }
            auto [res, acts] = sn.node->resolve_service(ev.service, now_);
            if (res.kind == Resolution::Kind::PENDING) {
                qid_lookup_[res.qid] = ev.lookup_idx;
            }
            process_actions(ev.node, std::move(acts), now_);
            if (res.kind != Resolution::Kind::PENDING)
                finalize_resolution(ev.node, {res.qid, res}, now_);
            return;
        }
        case Ek::CHURN: {
            auto& sn = nodes_.at(ev.node);
            TraceEvent te;
            te.kind = TraceEvent::Kind::CHURN;
            te.t = now_;
            te.a = ev.node;
            te.type = ev.up ? "up" : "down";
            trace_.push_back(te);
            if (!ev.up) {
                sn.online = false;
                ++sn.inc;  // invalidates in-flight messages and timers
                return;
            }
            sn.online = true;
            ++sn.inc;
            boot_node(sn, now_);  // fresh state from the bootstrap tables
            return;
        }
        case Ek::SAMPLE: {
            double sum = 0, sum2 = 0;
            std::size_t n = 0;
            for (const auto& [ep, sn] : nodes_) {
                if (!sn.online) continue;
                const double u = probe_of(sn, now_).cpu_util;
                sum += u;
                sum2 += u * u;
                ++n;
            }
            if (n > 0) {
                const double mean = sum / static_cast<double>(n);
                const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
                metrics_.load_stddev_series.push_back(std::sqrt(var));
            }
            return;
        }
    }
}

std::vector<Endpoint> SimNet::endpoints() const {
    std::vector<Endpoint> out;
    for (const auto& [ep, sn] : nodes_) out.push_back(ep);
    return out;
}

const Node& SimNet::node(const Endpoint& e) const { return *nodes_.at(e).node; }

bool SimNet::online(const Endpoint& e) const { return nodes_.at(e).online; }

std::size_t SimNet::domain_size(const DomainName& d) const {
    auto it = domain_sizes_.find(d);
    return it == domain_sizes_.end() ? 0 : it->second;
}

std::set<Endpoint> SimNet::oracle_lookup(const ServiceName& service) const {
    std::set<Endpoint> out;
    for (const auto& [ep, sn] : nodes_) {
        if (!sn.online || !sn.node) continue;
        if (sn.node->services().own_services.count(service)) out.insert(ep);
    }
    return out;
}

int SimNet::flood_ttl() const {
    int diameter = 1;
    for (const auto& [pair, h] : sc_.topology.hop) diameter = std::max(diameter, h);
    return diameter;
}

SimNet::FloodResult SimNet::resolve_service_flooding(const Endpoint& origin,
                                                     const ServiceName& service) const {
    FloodResult fr;
    auto oit = nodes_.find(origin);
    if (oit == nodes_.end() || !oit->second.online) return fr;
    auto provides = [&](const Endpoint& ep) {
        const auto& sn = nodes_.at(ep);
        return sn.online && sn.node && sn.node->services().own_services.count(service) > 0;
    };
    if (provides(origin)) {
        fr.found = true;
        return fr;  // satisfied locally, no traffic under either scheme
    }
    // TTL-limited flood over the hop-1 neighbor graph of online nodes:
    // every node forwards on first receipt to all neighbors but the sender
    std::map<Endpoint, std::vector<Endpoint>> adj;
    for (const auto& [a, sa] : nodes_) {
        if (!sa.online) continue;
        for (const auto& [b, sb] : nodes_) {
            if (a == b || !sb.online) continue;
            if (sc_.topology.hop_of(a, b) == 1) adj[a].push_back(b);
        }
    }
    const int ttl = flood_ttl();
    std::map<Endpoint, int> depth;
    depth[origin] = 0;
    std::deque<Endpoint> bfs{origin};
    while (!bfs.empty()) {
        Endpoint u = bfs.front();
        bfs.pop_front();
        const int d = depth[u];
        if (d >= ttl) continue;
        const auto& nbrs = adj[u];
        fr.messages +=
            static_cast<std::uint64_t>(nbrs.size()) - (u == origin ? 0 : 1);  // minus the sender
        for (const auto& v : nbrs) {
            if (depth.count(v)) continue;
            depth[v] = d + 1;
            if (provides(v)) fr.found = true;
            bfs.push_back(v);
        }
    }
    return fr;
}

}  // namespace pgrid
