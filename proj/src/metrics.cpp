#include "pgrid/metrics.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "pgrid/trace.hpp"

namespace pgrid {

namespace {
std::string fmt_time(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", t);
    return buf;
}
}  // namespace

std::string TraceEvent::render() const {
    std::string line = fmt_time(t);
    switch (kind) {
        case Kind::SEND: line += " send " + a.text() + " -> " + b.text() + " " + type; break;
        case Kind::DELIVER: line += " recv " + a.text() + " <- " + b.text() + " " + type; break;
        case Kind::DROP: line += " drop " + a.text() + " -> " + b.text() + " " + type; break;
        case Kind::CLASS_CHANGE: line += " class " + a.text() + " " + type; break;
        case Kind::ELECT: line += " elect " + a.text(); break;
        case Kind::ABDICATE: line += " abdicate " + a.text(); break;
        case Kind::MIGRATE: line += " migrate " + a.text() + " -> " + b.text() + " " + type; break;
        case Kind::LOOKUP: line += " lookup " + a.text() + " " + type; break;
        case Kind::RESOLVE: line += " resolve " + a.text() + " " + type; break;
        case Kind::CHURN: line += " churn " + a.text() + " " + type; break;
    }
    if (qid) line += " qid=" + std::to_string(qid);
    if (!detail.empty()) line += " " + detail;
    return line;
}

std::string render(const Trace& trace) {
    std::string out;
    for (const auto& ev : trace) {
        out += ev.render();
        out += '\n';
    }
    return out;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;  // object keys serialize sorted
    j["messages_by_type"] = messages_by_type;
    j["messages_total"] = messages_total;
    j["lookup_outcomes"] = {{"local", lookup_outcomes.local},
                            {"domain", lookup_outcomes.domain},
                            {"remote", lookup_outcomes.remote},
                            {"notfound", lookup_outcomes.notfound}};
    j["per_lookup_messages"] = per_lookup_messages;
    if (!per_lookup_flooding.empty()) j["per_lookup_flooding"] = per_lookup_flooding;
    j["load_stddev_series"] = load_stddev_series;
    j["load_stddev_time_avg"] = load_stddev_time_avg;
    j["migrations"] = {{"attempted", migrations.attempted},
                       {"succeeded", migrations.succeeded},
                       {"failed", migrations.failed}};
    j["leader_elections"] = leader_elections;
    j["dropped_network"] = dropped_network;
    j["dropped_churn"] = dropped_churn;
    j["conservation_violations"] = conservation_violations;
    j["flooding_messages_total"] = flooding_messages_total;
    j["lookup_messages_mean"] = lookup_messages_mean;
    j["flooding_messages_mean"] = flooding_messages_mean;
    j["traffic_ratio"] = traffic_ratio;
    return j.dump(2) + "\n";
}

std::string MetricsReport::series_csv() const {
    std::string out = "time,load_stddev\n";
    for (std::size_t i = 0; i < load_stddev_series.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", i, load_stddev_series[i]);
        out += buf;
    }
    return out;
}

}  // namespace pgrid
