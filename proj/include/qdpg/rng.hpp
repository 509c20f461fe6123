#pragma once

#include <cstdint>
#include <cmath>
#include <cstddef>

namespace qdpg {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives the seed of a named sub-stream from a base seed. Streams with
/// distinct tags are statistically independent; the mapping is fixed so runs
/// replay exactly.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_tag) {
    std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + stream_tag * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

/// xoshiro256++ with pinned uniform and Gaussian transforms.
///
/// The <random> distribution algorithms are implementation-defined, so they
/// cannot back a byte-reproducible experiment pipeline. Everything random in
/// this project flows through this class.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1); never returns an endpoint (safe under log()).
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform index in [0, n). Lemire multiply-shift; bias < n / 2^64.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; the spare value is cached, so draws
    /// consume the underlying stream two uniforms at a time.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qdpg
