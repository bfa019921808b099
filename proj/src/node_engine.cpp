#include <algorithm>
#include <cmath>

#include "pgrid/node.hpp"

namespace pgrid {

void Actions::merge(Actions&& other) {
    for (auto& s : other.sends) sends.push_back(std::move(s));
    for (auto& t : other.timers) timers.push_back(std::move(t));
    for (auto& d : other.decisions) decisions.push_back(std::move(d));
    for (auto& r : other.resolutions) resolutions.push_back(std::move(r));
    elected = elected || other.elected;
}

Node::Node(NodeInfo self, NodeConfig config, BootstrapTables boot, std::uint64_t rng_seed,
           std::uint64_t qid_base)
    : self_(std::move(self)),
      config_(config),
      domain_(std::move(boot.domain)),
      local_capacities_(std::move(boot.local_capacities)),
      next_qid_(qid_base + 1),
      rng_(rng_seed) {
    self_.domain = domain_;
    tables_.local_domain_members = std::move(boot.local_domain_members);
    tables_.local_domain_members.erase(self_.endpoint);
    tables_.external_nodes_list = std::move(boot.external_nodes);
    tables_.external_nodes_list.erase(domain_);
    local_capacities_[self_.endpoint] = self_.capacity_score;
}

std::optional<Endpoint> Node::my_leader() const {
    if (belief_) return belief_->leader;
    return std::nullopt;
}

void Node::set_own_services(std::set<ServiceName> services) {
    services_.own_services = std::move(services);
}

void Node::apply_admin_tables(const AdminTables& t) {
    domain_ = t.domain;
    self_.domain = t.domain;
    tables_.local_domain_members.clear();
    for (std::size_t i = 0; i < t.members.size(); ++i) {
        if (t.members[i] == self_.endpoint) continue;
        tables_.local_domain_members.insert(t.members[i]);
        local_capacities_[t.members[i]] = t.capacities[i];
    }
    tables_.external_nodes_list.clear();
    for (const auto& [dom, eps] : t.external) {
        if (dom == domain_) continue;
        tables_.external_nodes_list[dom] = std::set<Endpoint>(eps.begin(), eps.end());
    }
}

double Node::capacity_of(const Endpoint& e) const {
    auto it = local_capacities_.find(e);
    return it == local_capacities_.end() ? 0.0 : it->second;
}

// Total order on leadership claims: higher epoch wins, then higher
// capacity, then the smaller endpoint.
bool Node::claim_beats(const LeaderClaim& a, const LeaderClaim& b) const {
    if (a.epoch != b.epoch) return a.epoch > b.epoch;
    const double ca = capacity_of(a.leader), cb = capacity_of(b.leader);
    if (ca != cb) return ca > cb;
    return a.leader < b.leader;
}

std::vector<Endpoint> Node::external_endpoints() const {
    std::vector<Endpoint> out;
    for (const auto& [dom, eps] : tables_.external_nodes_list)
        for (const auto& ep : eps) out.push_back(ep);
    return out;
}

Actions Node::on_start(double now) {
    Actions out;
    if (tables_.local_domain_members.empty()) {
        // degenerate single-node domain: nobody to ask, become leader now
        out.merge(self_elect(now));
        return out;
    }
    start_election(now, out);
    return out;
}

void Node::start_election(double now, Actions& out) {
    (void)now;
    belief_.reset();
    for (const auto& peer : tables_.local_domain_members)
        out.sends.push_back({peer, GlQuery{self_.endpoint}});
    election_armed_ = true;
    ++election_token_;
    out.timers.push_back({TimerKind::ELECTION, config_.gl_election_timeout, election_token_});
}

Actions Node::self_elect(double now) {
    (void)now;
    Actions out;
    role_ = Role::LEADER;
    epoch_ = known_epoch_ + 1;
    known_epoch_ = epoch_;
    belief_ = LeaderClaim{self_.endpoint, epoch_};
    election_armed_ = false;
    reprobe_armed_ = false;
    out.elected = true;
    // claim the domain: peers either adopt or answer back with a better claim
    for (const auto& peer : tables_.local_domain_members)
        out.sends.push_back({peer, GlReply{self_.endpoint, domain_, epoch_}});
    // connect with the other group leaders
    for (const auto& ep : external_endpoints())
        out.sends.push_back({ep, GlOfDomainQuery{self_.endpoint}});
    // hand already-known foreign leaders our current under-loaded snapshot
    for (const auto& [dom, gl] : tables_.other_group_leader_list) gossip_to(gl, out);
    return out;
}

Actions Node::on_timer(TimerKind kind, std::uint64_t token, double now) {
    Actions out;
    switch (kind) {
        case TimerKind::ELECTION:
            if (!election_armed_ || token != election_token_) return out;
            election_armed_ = false;
            if (belief_) return out;  // a reply arrived first
            out.merge(self_elect(now));
            return out;

        case TimerKind::LEADER_REPROBE:
            if (!reprobe_armed_ || token != reprobe_token_) return out;
            reprobe_armed_ = false;
            // the leader did not answer the re-probe: forget it and rerun
            // the join-time election
            start_election(now, out);
            return out;

        case TimerKind::QUERY_TIMEOUT: {
            auto it = pending_origin_.find(token);
            if (it == pending_origin_.end()) return out;
            pending_origin_.erase(it);
            Resolution r;
            r.kind = Resolution::Kind::NOT_FOUND;
            r.reason = Resolution::Miss::TIMEOUT;
            r.qid = token;
            out.resolutions.push_back({token, r});
            leader_bound_timeout(now, out);
            return out;
        }

        case TimerKind::EXT_REPLY_TIMEOUT:
            if (!ext_wait_ || token != ext_token_) return out;
            ext_wait_.reset();
            leader_bound_timeout(now, out);
            return out;
    }
    return out;
}

// A request addressed to the leader went unanswered. Probe the leader
// directly; if the probe also gets no reply the reprobe timer clears the
// belief and reruns the election.
void Node::leader_bound_timeout(double now, Actions& out) {
    (void)now;
    if (!belief_ || belief_->leader == self_.endpoint) return;
    if (reprobe_armed_) return;  // one probe in flight is enough
    out.sends.push_back({belief_->leader, GlQuery{self_.endpoint}});
    reprobe_armed_ = true;
    ++reprobe_token_;
    out.timers.push_back({TimerKind::LEADER_REPROBE, config_.gl_election_timeout, reprobe_token_});
}

Actions Node::on_status_tick(const LoadSample& probe, double now) {
    Actions out;
    expire_stale(under_local_, now, config_.ttl);
    const LoadClass cls = classify_load(probe, config_.thresholds);
    if (cls == last_class_) return out;
    last_class_ = cls;
    const double cpu = std::round(probe.cpu_util * 100.0) / 100.0;
    const double ram = std::round(probe.ram_util * 100.0) / 100.0;
    for (const auto& peer : tables_.local_domain_members)
        out.sends.push_back({peer, LoadStatus{self_.endpoint, cpu, ram, cls}});
    return out;
}

Actions Node::handle_load_status(const LoadStatus& m, double now) {
    Actions out;
    if (tables_.local_domain_members.count(m.from) == 0) {
        ++drops_.unknown_sender;
        return out;
    }
    const bool changed = apply_load_status(under_local_, m.from, m.cls, now);
    if (changed && role_ == Role::LEADER) gossip_snapshot(out);
    return out;
}

// Random sample of the local under-loaded list, sent to every known
// foreign group leader (replacement semantics on the receiving side).
void Node::gossip_snapshot(Actions& out) {
    std::vector<Endpoint> sample = rng_.sample_k(under_local_.all(), config_.gossip_fanout_k);
    std::sort(sample.begin(), sample.end());
    for (const auto& [dom, gl] : tables_.other_group_leader_list)
        out.sends.push_back({gl, UnderloadedGossip{domain_, sample}});
}

void Node::gossip_to(const Endpoint& gl, Actions& out) {
    if (under_local_.empty()) return;
    std::vector<Endpoint> sample = rng_.sample_k(under_local_.all(), config_.gossip_fanout_k);
    std::sort(sample.begin(), sample.end());
    out.sends.push_back({gl, UnderloadedGossip{domain_, sample}});
}

Actions Node::handle_underloaded_gossip(const UnderloadedGossip& m, double now) {
    (void)now;
    Actions out;
    if (role_ != Role::LEADER) {
        ++drops_.not_leader;
        return out;
    }
    if (m.domain == domain_) {
        ++drops_.foreign_domain;
        return out;
    }
    if (m.nodes.empty())
        tables_.external_under_loaded_list.erase(m.domain);
    else
        tables_.external_under_loaded_list[m.domain] =
            std::set<Endpoint>(m.nodes.begin(), m.nodes.end());
    return out;
}

Actions Node::handle_gl_query(const GlQuery& m, double now) {
    (void)now;
    Actions out;
    if (role_ == Role::LEADER) {
        out.sends.push_back({m.from, GlReply{self_.endpoint, domain_, epoch_}});
    } else if (belief_) {
        // member relay of the known leader; shortens elections for joiners
        out.sends.push_back({m.from, GlReply{belief_->leader, domain_, belief_->epoch}});
    }
    return out;
}

Actions Node::handle_gl_reply(const GlReply& m, double now) {
    (void)now;
    Actions out;
    if (m.domain != domain_) {
        ++drops_.foreign_domain;
        return out;
    }
    known_epoch_ = std::max(known_epoch_, m.epoch);
    const LeaderClaim claim{m.leader, m.epoch};

    if (m.leader == self_.endpoint) {
        // an echo of our own leadership, or hearsay naming us while we are
        // a member; never self-adopt from hearsay — the election timer
        // decides that
        if (role_ == Role::LEADER) {
            reprobe_armed_ = false;
            if (m.epoch > epoch_) {
                // peers remember a higher epoch of ours (we restarted);
                // reclaim it so our assertions dominate again
                epoch_ = m.epoch;
                belief_ = LeaderClaim{self_.endpoint, epoch_};
            }
        }
        return out;
    }

    if (role_ == Role::LEADER) {
        // conflicting leadership claim for our own domain
        const LeaderClaim mine{self_.endpoint, epoch_};
        if (claim_beats(claim, mine)) {
            role_ = Role::MEMBER;
            belief_ = claim;
        } else {
            // we win; tell the claimant so it abdicates
            out.sends.push_back({m.leader, GlReply{self_.endpoint, domain_, epoch_}});
        }
        return out;
    }

    if (!belief_ || claim_beats(claim, *belief_) ||
        (claim.leader == belief_->leader && claim.epoch >= belief_->epoch)) {
        belief_ = claim;
        election_armed_ = false;
        reprobe_armed_ = false;
    } else if (claim_beats(*belief_, claim)) {
        // stale claim: answer with the better one so the claimant catches up
        out.sends.push_back({m.leader, GlReply{belief_->leader, domain_, belief_->epoch}});
    }
    return out;
}

Actions Node::handle_gl_of_domain_query(const GlOfDomainQuery& m, double now) {
    (void)now;
    Actions out;
    if (belief_) out.sends.push_back({m.from, GlOfDomainReply{domain_, belief_->leader}});
    return out;
}

Actions Node::handle_gl_of_domain_reply(const GlOfDomainReply& m, double now) {
    (void)now;
    Actions out;
    if (m.domain == domain_) {
        ++drops_.foreign_domain;
        return out;
    }
    auto it = tables_.other_group_leader_list.find(m.domain);
    const bool changed = it == tables_.other_group_leader_list.end() || it->second != m.leader;
    tables_.other_group_leader_list[m.domain] = m.leader;
    // first contact with that leader: hand it our current under-loaded
    // snapshot so its external list starts populated
    if (changed && role_ == Role::LEADER) gossip_to(m.leader, out);
    return out;
}

Actions Node::on_gl_refresh_tick(double now) {
    (void)now;
    Actions out;
    for (const auto& ep : external_endpoints())
        out.sends.push_back({ep, GlOfDomainQuery{self_.endpoint}});
    if (role_ == Role::LEADER) {
        // periodic re-assertion; heals split leadership under message loss
        for (const auto& peer : tables_.local_domain_members)
            out.sends.push_back({peer, GlReply{self_.endpoint, domain_, epoch_}});
    }
    return out;
}

Actions Node::on_message(const Message& m, double now) {
    struct V {
        Node& n;
        double now;
        Actions operator()(const LoadStatus& x) { return n.handle_load_status(x, now); }
        Actions operator()(const GlQuery& x) { return n.handle_gl_query(x, now); }
        Actions operator()(const GlReply& x) { return n.handle_gl_reply(x, now); }
        Actions operator()(const GlOfDomainQuery& x) {
            return n.handle_gl_of_domain_query(x, now);
        }
        Actions operator()(const GlOfDomainReply& x) {
            return n.handle_gl_of_domain_reply(x, now);
        }
        Actions operator()(const UnderloadedGossip& x) {
            return n.handle_underloaded_gossip(x, now);
        }
        Actions operator()(const ExtUnderloadedQuery& x) {
            return n.handle_ext_underloaded_query(x, now);
        }
        Actions operator()(const ExtUnderloadedReply& x) {
            return n.handle_ext_underloaded_reply(x, now);
        }
        Actions operator()(const OwnServices& x) { return n.handle_own_services(x, now); }
        Actions operator()(const ServiceQuery& x) { return n.handle_service_query(x, now); }
        Actions operator()(const ServiceFwd& x) { return n.handle_service_fwd(x, now); }
        Actions operator()(const ServiceReply& x) { return n.handle_service_reply(x, now); }
        Actions operator()(const AdminJoin&) {
            ++n.drops_.stale;  // nodes never serve joins
            return {};
        }
        Actions operator()(const AdminTables& x) {
            n.apply_admin_tables(x);
            return {};
        }
    };
    return std::visit(V{*this, now}, m);
}

}  // namespace pgrid
