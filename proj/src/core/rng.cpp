#include "tracer/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace tracer {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Purpose purpose, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix64(h ^ a);
    return splitmix64(h ^ (b * 0xD1B54A32D192ED03ULL));
}

std::uint64_t CounterRng::next_u64() {
    return splitmix64(key_ ^ splitmix64(counter_++));
}

double CounterRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::normal() {
    // Box-Muller, cosine branch only: two draws per variate keeps the
    // stream position a simple function of the number of variates.
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
}

std::uint64_t CounterRng::below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

std::vector<std::size_t> permutation(std::size_t n, CounterRng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace tracer
