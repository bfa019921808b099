#include "pgrid/codec.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace pgrid {

const char* type_token(const Message& m) {
    struct V {
        const char* operator()(const LoadStatus&) { return "LOAD"; }
        const char* operator()(const GlQuery&) { return "GLQ"; }
        const char* operator()(const GlReply&) { return "GLR"; }
        const char* operator()(const GlOfDomainQuery&) { return "GDQ"; }
        const char* operator()(const GlOfDomainReply&) { return "GDR"; }
        const char* operator()(const UnderloadedGossip&) { return "UGOS"; }
        const char* operator()(const ExtUnderloadedQuery&) { return "EUQ"; }
        const char* operator()(const ExtUnderloadedReply&) { return "EUR"; }
        const char* operator()(const OwnServices&) { return "OSVC"; }
        const char* operator()(const ServiceQuery&) { return "SQRY"; }
        const char* operator()(const ServiceFwd&) { return "SFWD"; }
        const char* operator()(const ServiceReply&) { return "SREP"; }
        const char* operator()(const AdminJoin&) { return "JOIN"; }
        const char* operator()(const AdminTables&) { return "TABL"; }
    };
    return std::visit(V{}, m);
}

namespace {

constexpr const char* kReasonNotLeader = "NOTLEADER";

std::string real2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const char* class_token(LoadClass c) {
    switch (c) {
        case LoadClass::UNDER_BOTH: return "UB";
        case LoadClass::UNDER_CPU_ONLY: return "UC";
        case LoadClass::UNDER_RAM_ONLY: return "UR";
        case LoadClass::NORMAL: return "NM";
        case LoadClass::OVERLOADED: return "OV";
    }
    return "?";
}

std::optional<LoadClass> parse_class(std::string_view s) {
    if (s == "UB") return LoadClass::UNDER_BOTH;
    if (s == "UC") return LoadClass::UNDER_CPU_ONLY;
    if (s == "UR") return LoadClass::UNDER_RAM_ONLY;
    if (s == "NM") return LoadClass::NORMAL;
    if (s == "OV") return LoadClass::OVERLOADED;
    return std::nullopt;
}

std::string ep_list(const std::vector<Endpoint>& eps) {
    if (eps.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (i) out += ',';
        out += eps[i].text();
    }
    return out;
}

std::string name_list(const std::vector<std::string>& names) {
    if (names.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ',';
        out += names[i];
    }
    return out;
}

// Strict two-decimal real: digits '.' digit digit, no sign, no leading zeros
// beyond a single "0".
std::optional<double> parse_real2(std::string_view s) {
    auto dot = s.find('.');
    if (dot == std::string_view::npos || dot == 0 || s.size() != dot + 3) return std::nullopt;
    std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if (ip.size() > 1 && ip[0] == '0') return std::nullopt;
    std::uint64_t whole = 0, frac = 0;
    for (char c : ip) {
        if (c < '0' || c > '9') return std::nullopt;
        whole = whole * 10 + static_cast<std::uint64_t>(c - '0');
        if (whole > 1000000) return std::nullopt;
    }
    for (char c : fp) {
        if (c < '0' || c > '9') return std::nullopt;
        frac = frac * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return static_cast<double>(whole) + static_cast<double>(frac) / 100.0;
}

std::optional<double> parse_util(std::string_view s) {
    auto v = parse_real2(s);
    if (!v || *v > 1.0) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    if (s.empty() || (s.size() > 1 && s[0] == '0')) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<std::vector<Endpoint>> parse_ep_list(std::string_view s) {
    std::vector<Endpoint> out;
    if (s == "-") return out;
    while (!s.empty()) {
        auto comma = s.find(',');
        std::string_view item = s.substr(0, comma);
        auto ep = parse_endpoint(item);
        if (!ep) return std::nullopt;
        out.push_back(*ep);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
        if (s.empty()) return std::nullopt;  // trailing comma
    }
    if (out.empty()) return std::nullopt;  // "" is not a list; "-" is
    return out;
}

std::optional<std::vector<std::string>> parse_name_list(std::string_view s) {
    std::vector<std::string> out;
    if (s == "-") return out;
    while (!s.empty()) {
        auto comma = s.find(',');
        std::string_view item = s.substr(0, comma);
        if (!valid_name(item)) return std::nullopt;
        out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
        if (s.empty()) return std::nullopt;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

struct Encoder {
    std::string operator()(const LoadStatus& m) {
        return "LOAD " + m.from.text() + ' ' + real2(m.cpu) + ' ' + real2(m.ram) + ' ' +
               class_token(m.cls);
    }
    std::string operator()(const GlQuery& m) { return "GLQ " + m.from.text(); }
    std::string operator()(const GlReply& m) {
        return "GLR " + m.leader.text() + ' ' + m.domain + ' ' + std::to_string(m.epoch);
    }
    std::string operator()(const GlOfDomainQuery& m) { return "GDQ " + m.from.text(); }
    std::string operator()(const GlOfDomainReply& m) {
        return "GDR " + m.domain + ' ' + m.leader.text();
    }
    std::string operator()(const UnderloadedGossip& m) {
        return "UGOS " + m.domain + ' ' + ep_list(m.nodes);
    }
    std::string operator()(const ExtUnderloadedQuery& m) { return "EUQ " + m.from.text(); }
    std::string operator()(const ExtUnderloadedReply& m) {
        std::string s = "EUR " + ep_list(m.nodes);
        if (m.reason == ReplyReason::NOT_LEADER) s += std::string(" ") + kReasonNotLeader;
        return s;
    }
    std::string operator()(const OwnServices& m) {
        return "OSVC " + m.from.text() + ' ' + name_list(m.services);
    }
    std::string operator()(const ServiceQuery& m) {
        return "SQRY " + m.origin.text() + ' ' + m.service + ' ' + std::to_string(m.qid);
    }
    std::string operator()(const ServiceFwd& m) {
        return "SFWD " + m.origin.text() + ' ' + m.via_gl.text() + ' ' + m.service + ' ' +
               std::to_string(m.qid);
    }
    std::string operator()(const ServiceReply& m) {
        std::string s =
            "SREP " + m.service + ' ' + std::to_string(m.qid) + ' ' + ep_list(m.providers);
        if (m.reason == ReplyReason::NOT_LEADER) s += std::string(" ") + kReasonNotLeader;
        return s;
    }
    std::string operator()(const AdminJoin& m) {
        return "JOIN " + m.from.text() + ' ' + real2(m.capacity);
    }
    std::string operator()(const AdminTables& m) {
        if (m.capacities.size() != m.members.size())
            throw std::logic_error("AdminTables members/capacities mismatch");
        std::string mem;
        for (std::size_t i = 0; i < m.members.size(); ++i) {
            if (i) mem += ',';
            mem += m.members[i].text() + '@' + real2(m.capacities[i]);
        }
        if (mem.empty()) mem = "-";
        std::string ext;
        for (const auto& [dom, eps] : m.external) {
            if (!ext.empty()) ext += ',';
            ext += dom + '=';
            for (std::size_t i = 0; i < eps.size(); ++i) {
                if (i) ext += ';';
                ext += eps[i].text();
            }
        }
        if (ext.empty()) ext = "-";
        return "TABL " + m.domain + ' ' + mem + ' ' + ext;
    }
};

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    while (!s.empty()) {
        auto sp = s.find(' ');
        out.push_back(s.substr(0, sp));
        if (sp == std::string_view::npos) break;
        s.remove_prefix(sp + 1);
        if (s.empty()) out.push_back(s);  // trailing space -> empty field, rejected later
    }
    return out;
}

}  // namespace

std::string encode(const Message& m) {
    std::string line = "PG1 " + std::visit(Encoder{}, m) + "\n";
    if (line.size() > kMaxWireBytes)
        throw OversizeMessage("encoded message exceeds " + std::to_string(kMaxWireBytes) +
                              " bytes");
    return line;
}

std::optional<Message> decode(std::string_view line) {
    if (line.size() < 5 || line.size() > kMaxWireBytes) return std::nullopt;
    if (line.back() != '\n') return std::nullopt;
    line.remove_suffix(1);
    for (char c : line)
        if (c == '\n' || c == '\r' || c == '\0') return std::nullopt;

    auto f = split_fields(line);
    if (f.size() < 2 || f[0] != "PG1") return std::nullopt;
    for (const auto& t : f)
        if (t.empty()) return std::nullopt;
    const std::string_view type = f[1];
    const std::size_t n = f.size() - 2;  // payload field count
    const auto* a = f.data() + 2;

    if (type == "LOAD") {
        if (n != 4) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        auto cpu = parse_util(a[1]);
        auto ram = parse_util(a[2]);
        auto cls = parse_class(a[3]);
        if (!ep || !cpu || !ram || !cls) return std::nullopt;
        return Message{LoadStatus{*ep, *cpu, *ram, *cls}};
    }
    if (type == "GLQ") {
        if (n != 1) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        if (!ep) return std::nullopt;
        return Message{GlQuery{*ep}};
    }
    if (type == "GLR") {
        if (n != 3) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        auto epoch = parse_u64(a[2]);
        if (!ep || !valid_name(a[1]) || !epoch) return std::nullopt;
        return Message{GlReply{*ep, std::string(a[1]), *epoch}};
    }
    if (type == "GDQ") {
        if (n != 1) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        if (!ep) return std::nullopt;
        return Message{GlOfDomainQuery{*ep}};
    }
    if (type == "GDR") {
        if (n != 2) return std::nullopt;
        auto ep = parse_endpoint(a[1]);
        if (!valid_name(a[0]) || !ep) return std::nullopt;
        return Message{GlOfDomainReply{std::string(a[0]), *ep}};
    }
    if (type == "UGOS") {
        if (n != 2) return std::nullopt;
        auto eps = parse_ep_list(a[1]);
        if (!valid_name(a[0]) || !eps) return std::nullopt;
        return Message{UnderloadedGossip{std::string(a[0]), *eps}};
    }
    if (type == "EUQ") {
        if (n != 1) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        if (!ep) return std::nullopt;
        return Message{ExtUnderloadedQuery{*ep}};
    }
    if (type == "EUR") {
        if (n != 1 && n != 2) return std::nullopt;
        auto eps = parse_ep_list(a[0]);
        if (!eps) return std::nullopt;
        ReplyReason r = ReplyReason::NONE;
        if (n == 2) {
            if (a[1] != kReasonNotLeader) return std::nullopt;
            r = ReplyReason::NOT_LEADER;
        }
        return Message{ExtUnderloadedReply{*eps, r}};
    }
    if (type == "OSVC") {
        if (n != 2) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        auto svcs = parse_name_list(a[1]);
        if (!ep || !svcs) return std::nullopt;
        return Message{OwnServices{*ep, *svcs}};
    }
    if (type == "SQRY") {
        if (n != 3) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        auto qid = parse_u64(a[2]);
        if (!ep || !valid_name(a[1]) || !qid) return std::nullopt;
        return Message{ServiceQuery{*ep, std::string(a[1]), *qid}};
    }
    if (type == "SFWD") {
        if (n != 4) return std::nullopt;
        auto origin = parse_endpoint(a[0]);
        auto via = parse_endpoint(a[1]);
        auto qid = parse_u64(a[3]);
        if (!origin || !via || !valid_name(a[2]) || !qid) return std::nullopt;
        return Message{ServiceFwd{*origin, *via, std::string(a[2]), *qid}};
    }
    if (type == "SREP") {
        if (n != 3 && n != 4) return std::nullopt;
        auto qid = parse_u64(a[1]);
        auto eps = parse_ep_list(a[2]);
        if (!valid_name(a[0]) || !qid || !eps) return std::nullopt;
        ReplyReason r = ReplyReason::NONE;
        if (n == 4) {
            if (a[3] != kReasonNotLeader) return std::nullopt;
            r = ReplyReason::NOT_LEADER;
        }
        return Message{ServiceReply{std::string(a[0]), *eps, *qid, r}};
    }
    if (type == "JOIN") {
        if (n != 2) return std::nullopt;
        auto ep = parse_endpoint(a[0]);
        auto cap = parse_real2(a[1]);
        if (!ep || !cap) return std::nullopt;
        return Message{AdminJoin{*ep, *cap}};
    }
    if (type == "TABL") {
        if (n != 3) return std::nullopt;
        if (!valid_name(a[0])) return std::nullopt;
        AdminTables t;
        t.domain = std::string(a[0]);
        if (a[1] != "-") {
            std::string_view s = a[1];
            while (!s.empty()) {
                auto comma = s.find(',');
                std::string_view item = s.substr(0, comma);
                auto at = item.find('@');
                if (at == std::string_view::npos) return std::nullopt;
                auto ep = parse_endpoint(item.substr(0, at));
                auto cap = parse_real2(item.substr(at + 1));
                if (!ep || !cap) return std::nullopt;
                t.members.push_back(*ep);
                t.capacities.push_back(*cap);
                if (comma == std::string_view::npos) break;
                s.remove_prefix(comma + 1);
                if (s.empty()) return std::nullopt;
            }
            if (t.members.empty()) return std::nullopt;
        }
        if (a[2] != "-") {
            std::string_view s = a[2];
            while (!s.empty()) {
                auto comma = s.find(',');
                std::string_view grp = s.substr(0, comma);
                auto eq = grp.find('=');
                if (eq == std::string_view::npos || eq == 0) return std::nullopt;
                std::string_view dom = grp.substr(0, eq);
                if (!valid_name(dom)) return std::nullopt;
                std::string_view eplist = grp.substr(eq + 1);
                std::vector<Endpoint> eps;
                while (!eplist.empty()) {
                    auto semi = eplist.find(';');
                    auto ep = parse_endpoint(eplist.substr(0, semi));
                    if (!ep) return std::nullopt;
                    eps.push_back(*ep);
                    if (semi == std::string_view::npos) break;
                    eplist.remove_prefix(semi + 1);
                    if (eplist.empty()) return std::nullopt;
                }
                if (eps.empty()) return std::nullopt;
                if (t.external.count(std::string(dom))) return std::nullopt;
                t.external[std::string(dom)] = std::move(eps);
                if (comma == std::string_view::npos) break;
                s.remove_prefix(comma + 1);
                if (s.empty()) return std::nullopt;
            }
        }
        return Message{t};
    }
    return std::nullopt;
}

}  // namespace pgrid
