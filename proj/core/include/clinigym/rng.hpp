#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace clinigym {

/// Deterministic 64-bit generator (splitmix64). All stochastic behavior in
/// the library routes through this so that runs are bit-reproducible across
/// platforms; std distributions are deliberately avoided because their
/// output is not pinned by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of entropy.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        // Rejection sampling to remove modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Approximately standard normal (sum of 12 uniforms), adequate for
    /// initialization noise.
    double normalish() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform();
        return s - 6.0;
    }

    /// Sample an index from an (unnormalized is not allowed) probability
    /// vector. Probabilities must sum to ~1; the last index absorbs
    /// floating-point slack.
    std::size_t categorical(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

    /// Derive an independent child stream; used to give each rollout group
    /// its own seed without correlating streams.
    Rng derive(std::uint64_t salt) const {
        Rng child(state_ ^ (0x632be59bd9b4e019ULL + salt * 0x9e3779b97f4a7c15ULL));
        child.next_u64();
        return child;
    }

private:
    std::uint64_t state_;
};

/// FNV-1a over bytes; stable across platforms, used for state hashing and
/// ticket bucketing.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace clinigym
