#include <algorithm>

#include "pgrid/node.hpp"

namespace pgrid {

// Lookup pipeline: own services, then local domain table, then the group
// leader, which fans the query out to the other group leaders.
std::pair<Resolution, Actions> Node::resolve_service(const ServiceName& service, double now) {
    Actions out;
    Resolution r;

    if (services_.own_services.count(service)) {
        r.kind = Resolution::Kind::LOCAL;
        r.provider = self_.endpoint;
        return {r, out};
    }

    auto it = services_.local_domain_services.find(service);
    if (it != services_.local_domain_services.end() && !it->second.empty()) {
        std::vector<Endpoint> providers(it->second.begin(), it->second.end());
        r.kind = Resolution::Kind::DOMAIN;
        r.provider = rng_.pick(providers);
        return {r, out};
    }

    if (!belief_) {
        r.kind = Resolution::Kind::NOT_FOUND;
        r.reason = Resolution::Miss::NO_LEADER;
        return {r, out};
    }

    const std::uint64_t qid = next_qid_++;
    if (belief_->leader == self_.endpoint) {
        // we are the group leader; skip the self-query and fan out directly
        if (tables_.other_group_leader_list.empty()) {
            r.kind = Resolution::Kind::NOT_FOUND;
            r.reason = Resolution::Miss::NO_PROVIDERS;
            return {r, out};
        }
        pending_origin_[qid] = {service, now};
        for (const auto& [dom, gl] : tables_.other_group_leader_list)
            out.sends.push_back({gl, ServiceFwd{self_.endpoint, self_.endpoint, service, qid}});
    } else {
        pending_origin_[qid] = {service, now};
        out.sends.push_back({belief_->leader, ServiceQuery{self_.endpoint, service, qid}});
    }
    out.timers.push_back({TimerKind::QUERY_TIMEOUT, config_.query_timeout, qid});
    r.kind = Resolution::Kind::PENDING;
    r.qid = qid;
    return {r, out};
}

void Node::expire_pending_gl(double now) {
    std::erase_if(pending_gl_, [&](const PendingQuery& p) {
        return now - p.issued_at > config_.query_timeout;
    });
}

Actions Node::handle_service_query(const ServiceQuery& m, double now) {
    Actions out;
    if (role_ != Role::LEADER) {
        ++drops_.not_leader;
        out.sends.push_back(
            {m.origin, ServiceReply{m.service, {}, m.qid, ReplyReason::NOT_LEADER}});
        return out;
    }
    expire_pending_gl(now);

    auto it = services_.local_domain_services.find(m.service);
    if (it != services_.local_domain_services.end() && !it->second.empty()) {
        std::vector<Endpoint> providers(it->second.begin(), it->second.end());
        providers = rng_.sample_k(std::move(providers), config_.reply_sample_size);
        std::sort(providers.begin(), providers.end());
        out.sends.push_back({m.origin, ServiceReply{m.service, providers, m.qid}});
        return out;
    }
    if (tables_.other_group_leader_list.empty()) {
        // nothing to forward to; a decisive miss beats a silent timeout
        out.sends.push_back({m.origin, ServiceReply{m.service, {}, m.qid}});
        return out;
    }
    pending_gl_.push_back({m.qid, m.origin, m.service, now});
    for (const auto& [dom, gl] : tables_.other_group_leader_list)
        out.sends.push_back({gl, ServiceFwd{m.origin, self_.endpoint, m.service, m.qid}});
    return out;
}

Actions Node::handle_service_fwd(const ServiceFwd& m, double now) {
    (void)now;
    Actions out;
    if (role_ != Role::LEADER) {
        ++drops_.not_leader;
        return out;
    }
    auto it = services_.local_domain_services.find(m.service);
    if (it == services_.local_domain_services.end() || it->second.empty())
        return out;  // misses are silent; the origin's timeout decides
    std::vector<Endpoint> providers(it->second.begin(), it->second.end());
    providers = rng_.sample_k(std::move(providers), config_.reply_sample_size);
    std::sort(providers.begin(), providers.end());
    out.sends.push_back({m.via_gl, ServiceReply{m.service, providers, m.qid}});
    return out;
}

Actions Node::handle_service_reply(const ServiceReply& m, double now) {
    Actions out;

    auto it = pending_origin_.find(m.qid);
    if (it != pending_origin_.end() && it->second.service == m.service) {
        pending_origin_.erase(it);
        Resolution r;
        r.qid = m.qid;
        if (m.reason == ReplyReason::NOT_LEADER) {
            r.kind = Resolution::Kind::NOT_FOUND;
            r.reason = Resolution::Miss::NOT_LEADER;
            // our leader table was stale; rerun the election probe
            start_election(now, out);
        } else if (m.providers.empty()) {
            r.kind = Resolution::Kind::NOT_FOUND;
            r.reason = Resolution::Miss::NO_PROVIDERS;
        } else {
            r.kind = Resolution::Kind::REMOTE;
            r.provider = m.providers[rng_.index(m.providers.size())];
        }
        out.resolutions.push_back({m.qid, r});
        return out;
    }

    // group-leader side: relay the first positive answer to the origin
    bool relayed = false;
    for (auto pit = pending_gl_.begin(); pit != pending_gl_.end();) {
        if (pit->qid == m.qid && pit->service == m.service) {
            out.sends.push_back({pit->origin, ServiceReply{m.service, m.providers, m.qid}});
            pit = pending_gl_.erase(pit);
            relayed = true;
        } else {
            ++pit;
        }
    }
    if (!relayed) ++drops_.unknown_qid;
    return out;
}

Actions Node::on_services_tick(double now) {
    (void)now;
    Actions out;
    // the announcement is authoritative full state; apply it to our own
    // table too so local_domain_services covers self
    merge_service_announcement(services_, self_.endpoint, services_.own_services);
    std::vector<ServiceName> svcs(services_.own_services.begin(), services_.own_services.end());
    for (const auto& peer : tables_.local_domain_members)
        out.sends.push_back({peer, OwnServices{self_.endpoint, svcs}});
    return out;
}

Actions Node::handle_own_services(const OwnServices& m, double now) {
    (void)now;
    Actions out;
    if (tables_.local_domain_members.count(m.from) == 0) {
        ++drops_.unknown_sender;
        return out;
    }
    merge_service_announcement(services_, m.from,
                               std::set<ServiceName>(m.services.begin(), m.services.end()));
    return out;
}

}  // namespace pgrid
