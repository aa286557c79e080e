#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace uabs {

/// Deterministic 64-bit random stream (splitmix64). Value-semantic: copying a
/// stream forks it at its current position. Every stochastic routine in the
/// library takes one of these explicitly; nothing reads global state, so a
/// fixed seed fixes a run bit-for-bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased uniform integer in [0, n), n > 0. Uses rejection sampling.
    std::uint64_t below(std::uint64_t n);

    /// Uniform integer in [lo, hi], bounds inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Index draw from a probability vector (entries nonnegative, summing to 1).
    std::size_t categorical(std::span<const double> probs);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t k = v.size(); k > 1; --k) {
            std::swap(v[k - 1], v[below(k)]);
        }
    }

private:
    std::uint64_t state_;
};

/// Stable derivation of substream seeds: mixes a base seed with a label and up
/// to two indices. Gives every (purpose, task, episode) its own independent
/// stream so results do not depend on scheduling or evaluation order.
std::uint64_t derive_key(std::uint64_t base, std::string_view label,
                         std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace uabs
