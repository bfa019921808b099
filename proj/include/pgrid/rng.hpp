#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pgrid {

// All randomness in the protocol and the simulator flows through this
// wrapper so runs are reproducible and tests can pin draws. The draw
// procedures below are part of the documented behavior:
//   index(n)        = next_u64() % n
//   real01()        = top 53 bits of next_u64() / 2^53
//   sample_k(v, k)  = partial Fisher-Yates over v: for i in [0,k),
//                     swap(v[i], v[i + index(n-i)]); result is v[0..k)
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[index(v.size())];
    }

    template <typename T>
    std::vector<T> sample_k(std::vector<T> v, std::size_t k) {
        if (k > v.size()) k = v.size();
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + index(v.size() - i);
            std::swap(v[i], v[j]);
        }
        v.resize(k);
        return v;
    }

private:
    std::mt19937_64 gen_;
};

// FNV-1a; used to derive per-node seeds from (scenario seed, endpoint text).
std::uint64_t fnv1a(std::string_view s);

// splitmix64 finalizer; mixes seed components into a stream seed.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

}  // namespace pgrid
