#pragma once

#include <cstdint>

#include "tos/vec.hpp"

namespace tos {

// Counter-based generator (splitmix64 over seed ^ counter mixes). Every draw
// is a pure function of (seed, counter), so corpora are bit-reproducible and
// insensitive to call reordering across streams.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed ^ (stream * 0x9e3779b97f4a7c15ULL)), counter_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    Vec uniform_vec(std::size_t n, double lo, double hi) {
        Vec v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace tos
