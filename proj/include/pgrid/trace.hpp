#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgrid/endpoint.hpp"
#include "pgrid/load.hpp"

namespace pgrid {

// One line of the simulator's event trace. Rendered text is byte-stable
// for a given (scenario, seed): determinism is asserted on the rendering.
struct TraceEvent {
    enum class Kind {
        SEND,
        DELIVER,
        DROP,          // network loss or churn discard
        CLASS_CHANGE,  // a node's load class changed
        ELECT,         // self-election
        ABDICATE,
        MIGRATE,
        LOOKUP,   // resolution issued
        RESOLVE,  // resolution completed
        CHURN,
    };

    Kind kind{};
    double t = 0.0;
    Endpoint a;           // acting node / sender
    Endpoint b;           // peer / target, when meaningful
    std::string type;     // message type token, class names, outcome, ...
    std::string detail;   // free-form: "qid=..", "epoch=..", task ids
    std::uint64_t qid = 0;

    std::string render() const;
};

using Trace = std::vector<TraceEvent>;

std::string render(const Trace& trace);

}  // namespace pgrid
