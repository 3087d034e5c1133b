#ifndef FNPDE_RNG_HPP
#define FNPDE_RNG_HPP

#include <cstdint>

namespace fnpde {

// xoshiro256++ with splitmix64 seeding. Self-contained so that runs are
// reproducible byte-for-byte independently of the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t z = seed;
        for (auto& word : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            uint64_t s = z;
            s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ULL;
            s = (s ^ (s >> 27)) * 0x94d049bb133111ebULL;
            word = s ^ (s >> 31);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform index in [0, n).
    uint64_t index(uint64_t n) { return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n; }

    // Derive an independent stream (e.g. one per repeat).
    Rng split(uint64_t stream) const {
        Rng r(state_[0] ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
        return r;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

}  // namespace fnpde

#endif
