#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace casc {

// splitmix64 (Steele et al.); used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed splitting rule: every parallel task draws its own generator from
// (master seed, stream id, task index) so results never depend on thread
// scheduling. child = splitmix64(splitmix64(master ^ C*stream) + index).
enum class SeedStream : std::uint64_t {
    louvain = 1,
    sbm_row = 2,
    sim_cascade = 3,
    tree = 4,
    fold_shuffle = 5,
    smote = 6,
    stability_run = 7,
    synth_plan = 8,
    cv_task = 9,
};

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) {
    std::uint64_t s = splitmix64(master ^ (0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(stream)));
    return splitmix64(s + index);
}

// xoshiro256** by Blackman/Vigna. Self-contained so that draws are
// bit-identical across platforms and standard libraries; std::*_distribution
// is deliberately avoided everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& word : s_) {
            sm = splitmix64(sm);
            word = sm;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); n > 0. Unbiased via rejection.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t x, r;
        do {
            x = next_u64();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);
        return r;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace casc
