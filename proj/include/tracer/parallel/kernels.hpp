#pragma once

#include "tracer/core/types.hpp"

#include <cstddef>
#include <functional>
#include <vector>

// Data-parallel kernels with an OpenMP path and a serial reference path.
// Both paths split the index range into the same fixed blocks and combine
// block results in block order, so results are bitwise identical regardless
// of thread count or schedule.
namespace tracer::parallel {

enum class Exec { Serial, OpenMP };

/// Worker cap: TRACER_THREADS when set to a positive integer, otherwise the
/// number of hardware threads.
int thread_budget();

inline constexpr std::size_t kDefaultBlock = 1024;

/// Running sample moments, mergeable in a fixed order.
struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const Moments& other);
    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const;
    double std_error() const;
};

/// Moments of f(0), ..., f(n-1). f must be safe to call concurrently.
Moments blocked_moments(std::size_t n, const std::function<double(std::size_t)>& f, Exec exec,
                        std::size_t block = kDefaultBlock);

/// Sum over i of the vector f(i) (each of length dim).
Vector blocked_vector_sum(std::size_t n, Eigen::Index dim, const std::function<Vector(std::size_t)>& f,
                          Exec exec, std::size_t block = kDefaultBlock);

/// Values f(0), ..., f(n-1) in index order.
std::vector<double> map_indexed(std::size_t n, const std::function<double(std::size_t)>& f, Exec exec);

/// Runs body(i) for i in [0, n) with at most max_threads workers. Used for
/// independent training runs; each body owns its outputs.
void for_each_task(std::size_t n, const std::function<void(std::size_t)>& body, int max_threads);

}  // namespace tracer::parallel
