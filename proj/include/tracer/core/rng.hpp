#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tracer {

/// Independent random streams derived from one master seed. Every consumer
/// (dataset noise, label flips, initialization, shuffling, probes) keys its
/// own stream so changing one never perturbs another.
enum class Purpose : std::uint64_t {
    Dataset = 1,
    LabelFlip = 2,
    Init = 3,
    Shuffle = 4,
    Probe = 5,
    MonteCarlo = 6,
    Split = 7,
    GradientNoise = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, Purpose purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0);

/// Counter-based generator: draw k is a pure function of (key, k), so any
/// stream position can be reproduced without replaying earlier draws.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1], safe for logarithms.
    double uniform_open();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Fisher-Yates permutation of [0, n) drawn from the given stream.
std::vector<std::size_t> permutation(std::size_t n, CounterRng& rng);

}  // namespace tracer
