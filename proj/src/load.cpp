#include "pgrid/load.hpp"

namespace pgrid {

const char* to_string(LoadClass c) {
    switch (c) {
        case LoadClass::UNDER_BOTH: return "UNDER_BOTH";
        case LoadClass::UNDER_CPU_ONLY: return "UNDER_CPU_ONLY";
        case LoadClass::UNDER_RAM_ONLY: return "UNDER_RAM_ONLY";
        case LoadClass::NORMAL: return "NORMAL";
        case LoadClass::OVERLOADED: return "OVERLOADED";
    }
    return "?";
}

LoadClass classify_load(const LoadSample& s, const LoadThresholds& t) {
    if (s.cpu_util >= t.over_cpu || s.ram_util >= t.over_ram) return LoadClass::OVERLOADED;
    const bool under_cpu = s.cpu_util < t.under_cpu;
    const bool under_ram = s.ram_util < t.under_ram;
    if (under_cpu && under_ram) return LoadClass::UNDER_BOTH;
    if (under_cpu) return LoadClass::UNDER_CPU_ONLY;
    if (under_ram) return LoadClass::UNDER_RAM_ONLY;
    return LoadClass::NORMAL;
}

}  // namespace pgrid
