#pragma once

namespace pgrid {

// Measured utilization of a node at a point in time, both axes in [0,1].
struct LoadSample {
    double cpu_util = 0.0;
    double ram_util = 0.0;
    double timestamp = 0.0;

    bool valid() const {
        return cpu_util >= 0.0 && cpu_util <= 1.0 && ram_util >= 0.0 && ram_util <= 1.0;
    }
};

enum class LoadClass {
    UNDER_BOTH,
    UNDER_CPU_ONLY,
    UNDER_RAM_ONLY,
    NORMAL,
    OVERLOADED,
};

const char* to_string(LoadClass c);

struct LoadThresholds {
    double under_cpu = 0.40;
    double under_ram = 0.60;
    double over_cpu = 0.85;
    double over_ram = 0.90;

    bool valid() const {
        return under_cpu > 0 && under_ram > 0 && over_cpu > under_cpu && over_ram > under_ram &&
               over_cpu <= 1.0 && over_ram <= 1.0;
    }
};

// Total classification: the overload test dominates, then the two-sided
// under test, then each single side.
LoadClass classify_load(const LoadSample& sample, const LoadThresholds& t);

}  // namespace pgrid
