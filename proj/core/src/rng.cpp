#include "uabs/rng.hpp"

#include <stdexcept>

namespace uabs {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next();
        if (r >= threshold) return r % n;
    }
}

std::size_t Rng::categorical(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("Rng::categorical: empty distribution");
    const double u = uniform();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_positive = i;
        cum += probs[i];
        if (u < cum) return i;
    }
    // u fell into the rounding gap behind the last positive entry
    return last_positive;
}

namespace {

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_key(std::uint64_t base, std::string_view label,
                         std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = base ^ 0xcbf29ce484222325ull;
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    h = mix(h + 0x9e3779b97f4a7c15ull * (a + 1));
    h = mix(h + 0x9e3779b97f4a7c15ull * (b + 1));
    return h;
}

}  // namespace uabs
