#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pgrid {

// Everything a simulation run reports. Serialized as JSON with sorted keys
// so runs diff cleanly; the stddev series additionally goes to a CSV.
struct MetricsReport {
    std::map<std::string, std::uint64_t> messages_by_type;  // sends, by wire token
    std::uint64_t messages_total = 0;

    struct LookupOutcomes {
        std::uint64_t local = 0;
        std::uint64_t domain = 0;
        std::uint64_t remote = 0;
        std::uint64_t notfound = 0;
    } lookup_outcomes;
    std::vector<std::uint64_t> per_lookup_messages;  // hierarchical, lookup order
    std::vector<std::uint64_t> per_lookup_flooding;  // baseline, when enabled

    std::vector<double> load_stddev_series;  // sampled once per time unit
    double load_stddev_time_avg = 0.0;

    struct Migrations {
        std::uint64_t attempted = 0;
        std::uint64_t succeeded = 0;
        std::uint64_t failed = 0;
    } migrations;

    std::uint64_t leader_elections = 0;
    std::uint64_t dropped_network = 0;  // lost to drop_prob
    std::uint64_t dropped_churn = 0;    // lost to node down/restart
    std::uint64_t conservation_violations = 0;

    std::uint64_t flooding_messages_total = 0;
    double lookup_messages_mean = 0.0;    // hierarchical, over pending-path lookups
    double flooding_messages_mean = 0.0;  // over the same lookups
    double traffic_ratio = 0.0;           // hierarchical mean / flooding mean

    std::string to_json() const;
    std::string series_csv() const;  // time,load_stddev
};

}  // namespace pgrid
