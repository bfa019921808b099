#include "pgrid/tables.hpp"

namespace pgrid {

std::vector<Endpoint> UnderLoadedLocalList::all() const {
    std::vector<Endpoint> out;
    out.reserve(last_update.size());
    for (const auto& [ep, t] : last_update) out.push_back(ep);
    return out;
}

bool apply_load_status(UnderLoadedLocalList& list, const Endpoint& from, LoadClass cls,
                       double now) {
    const bool was_both = list.section_both.erase(from) > 0;
    const bool was_cpu = list.section_cpu.erase(from) > 0;
    const bool was_ram = list.section_ram.erase(from) > 0;

    switch (cls) {
        case LoadClass::UNDER_BOTH:
            list.section_both.insert(from);
            list.last_update[from] = now;
            return !was_both;
        case LoadClass::UNDER_CPU_ONLY:
            list.section_cpu.insert(from);
            list.last_update[from] = now;
            return !was_cpu;
        case LoadClass::UNDER_RAM_ONLY:
            list.section_ram.insert(from);
            list.last_update[from] = now;
            return !was_ram;
        case LoadClass::NORMAL:
        case LoadClass::OVERLOADED:
            list.last_update.erase(from);
            return was_both || was_cpu || was_ram;
    }
    return false;
}

std::size_t expire_stale(UnderLoadedLocalList& list, double now, double ttl) {
    std::size_t removed = 0;
    for (auto it = list.last_update.begin(); it != list.last_update.end();) {
        if (now - it->second > ttl) {
            list.section_both.erase(it->first);
            list.section_cpu.erase(it->first);
            list.section_ram.erase(it->first);
            it = list.last_update.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

void merge_service_announcement(ServiceTables& tables, const Endpoint& from,
                                const std::set<ServiceName>& services) {
    for (auto it = tables.local_domain_services.begin();
         it != tables.local_domain_services.end();) {
        if (services.count(it->first) == 0) {
            it->second.erase(from);
            if (it->second.empty()) {
                it = tables.local_domain_services.erase(it);
                continue;
            }
        }
        ++it;
    }
    for (const auto& s : services) tables.local_domain_services[s].insert(from);
}

}  // namespace pgrid
