#ifndef PAINTTRAP_RNG_HPP
#define PAINTTRAP_RNG_HPP

#include <cstdint>

namespace painttrap {

// Counter-based uniform generator (splitmix64 stream keyed by up to three
// values). Each (seed, generation, member) tuple owns an independent stream,
// so optimizer results do not depend on evaluation order or thread count.
class StreamRng {
public:
    explicit StreamRng(std::uint64_t seed, std::uint64_t key1 = 0, std::uint64_t key2 = 0) {
        state_ = mix(mix(mix(seed + golden) + key1) + key2);
    }

    std::uint64_t next_u64() {
        state_ += golden;
        return mix(state_);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); n > 0
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace painttrap

#endif
