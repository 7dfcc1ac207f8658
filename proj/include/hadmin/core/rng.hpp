#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

namespace hadmin {

/// Seedable xoshiro256** generator whose output is identical on every platform.
///
/// Streams split by name: `child("hospital", 3)` derives a fresh generator from the
/// seed this generator was created with, never from its current position, so drawing
/// from one entity's stream cannot perturb a sibling's.
///
/// All distributions are implemented here (no std:: distributions, which are
/// implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    std::uint64_t seed() const { return seed_; }

    Rng child(std::string_view label, std::uint64_t index = 0) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
        for (unsigned char c : label) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        std::uint64_t x = seed_ ^ (h + 0x9e3779b97f4a7c15ULL);
        std::uint64_t a = splitmix64(x);
        x ^= index * 0xd1b54a32d192ed03ULL;
        std::uint64_t b = splitmix64(x);
        return Rng(a ^ (b << 1));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, bound), unbiased (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        __uint128_t m = static_cast<__uint128_t>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform integer in [lo, hi] (inclusive).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Index drawn with the given (non-negative, summing to ~1) weights.
    std::size_t weighted(std::span<const double> weights) {
        double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        // Floating residue: return the last index with positive weight.
        for (std::size_t i = weights.size(); i-- > 0;) {
            if (weights[i] > 0) return i;
        }
        return 0;
    }

    /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    template <class T>
    const T& pick(std::span<const T> items) {
        return items[static_cast<std::size_t>(below(items.size()))];
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t state_[4];
};

} // namespace hadmin
