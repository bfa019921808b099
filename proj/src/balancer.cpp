#include <algorithm>

#include "pgrid/node.hpp"

namespace pgrid {

// Candidate pool by demand shape: a task heavy on both axes needs a target
// with headroom on both; a one-sided task can also use the matching
// single-sided section.
std::optional<Endpoint> Node::select_local_target(const TaskDemand& demand) {
    std::vector<Endpoint> pool(under_local_.section_both.begin(),
                               under_local_.section_both.end());
    if (demand.cpu > demand.ram) {
        pool.insert(pool.end(), under_local_.section_cpu.begin(),
                    under_local_.section_cpu.end());
    } else if (demand.ram > demand.cpu) {
        pool.insert(pool.end(), under_local_.section_ram.begin(),
                    under_local_.section_ram.end());
    }
    std::sort(pool.begin(), pool.end());
    if (pool.empty()) return std::nullopt;
    return pool[rng_.index(pool.size())];
}

Actions Node::on_balance_tick(const LoadSample& probe, const std::optional<TaskDemand>& candidate,
                              double now) {
    Actions out;
    if (!config_.balancing_enabled) return out;
    expire_stale(under_local_, now, config_.ttl);
    if (classify_load(probe, config_.thresholds) != LoadClass::OVERLOADED) return out;
    if (ext_wait_) return out;  // an external candidate request is in flight
    if (!candidate) return out;

    if (auto target = select_local_target(*candidate)) {
        out.decisions.push_back({candidate->task_id, *target, MigrationTier::LOCAL, now});
        return out;
    }
    if (!belief_) return out;  // no leader to ask; retry next tick
    out.sends.push_back({belief_->leader, ExtUnderloadedQuery{self_.endpoint}});
    ext_wait_ = *candidate;
    ++ext_token_;
    out.timers.push_back({TimerKind::EXT_REPLY_TIMEOUT, config_.ext_reply_timeout, ext_token_});
    return out;
}

Actions Node::handle_ext_underloaded_query(const ExtUnderloadedQuery& m, double now) {
    (void)now;
    Actions out;
    if (role_ != Role::LEADER) {
        ++drops_.not_leader;
        out.sends.push_back({m.from, ExtUnderloadedReply{{}, ReplyReason::NOT_LEADER}});
        return out;
    }
    std::vector<Endpoint> all;
    for (const auto& [dom, eps] : tables_.external_under_loaded_list)
        all.insert(all.end(), eps.begin(), eps.end());
    all = rng_.sample_k(std::move(all), config_.reply_sample_size);
    std::sort(all.begin(), all.end());
    out.sends.push_back({m.from, ExtUnderloadedReply{all}});
    return out;
}

Actions Node::handle_ext_underloaded_reply(const ExtUnderloadedReply& m, double now) {
    Actions out;
    if (!ext_wait_) {
        ++drops_.stale;
        return out;
    }
    const TaskDemand task = *ext_wait_;
    ext_wait_.reset();
    ++ext_token_;  // invalidate the outstanding timeout
    if (m.reason == ReplyReason::NOT_LEADER) {
        start_election(now, out);
        return out;
    }
    if (m.nodes.empty()) return out;
    const Endpoint target = m.nodes[rng_.index(m.nodes.size())];
    out.decisions.push_back({task.task_id, target, MigrationTier::EXTERNAL, now});
    return out;
}

}  // namespace pgrid
