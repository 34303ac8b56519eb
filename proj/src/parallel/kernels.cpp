#include "tracer/parallel/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace tracer::parallel {

int thread_budget() {
    if (const char* env = std::getenv("TRACER_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void Moments::add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
}

void Moments::merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(other.count);
    const double d = other.mean - mean;
    const double n = n1 + n2;
    mean += d * n2 / n;
    m2 += other.m2 + d * d * n1 * n2 / n;
    count += other.count;
}

double Moments::variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
}

double Moments::std_error() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

namespace {

std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

// Exceptions must not escape an OpenMP region; capture the first and rethrow.
class ErrorSlot {
public:
    template <class F>
    void run(F&& f) {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

}  // namespace

Moments blocked_moments(std::size_t n, const std::function<double(std::size_t)>& f, Exec exec,
                        std::size_t block) {
    require(block >= 1, "blocked_moments: block must be positive");
    const std::size_t blocks = block_count(n, block);
    std::vector<Moments> partial(blocks);
    auto body = [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * block);
        for (std::size_t i = b * block; i < end; ++i) partial[b].add(f(i));
    };
    if (exec == Exec::OpenMP) {
        ErrorSlot errors;
        const auto count = static_cast<long long>(blocks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_budget())
        for (long long b = 0; b < count; ++b) {
            errors.run([&] { body(static_cast<std::size_t>(b)); });
        }
        errors.rethrow();
    } else {
        for (std::size_t b = 0; b < blocks; ++b) body(b);
    }
    Moments total;
    for (const auto& m : partial) total.merge(m);
    return total;
}

Vector blocked_vector_sum(std::size_t n, Eigen::Index dim, const std::function<Vector(std::size_t)>& f,
                          Exec exec, std::size_t block) {
    require(block >= 1, "blocked_vector_sum: block must be positive");
    const std::size_t blocks = block_count(n, block);
    std::vector<Vector> partial(blocks, Vector::Zero(dim));
    auto body = [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * block);
        for (std::size_t i = b * block; i < end; ++i) {
            const Vector v = f(i);
            require(v.size() == dim, "blocked_vector_sum: term has wrong length");
            partial[b] += v;
        }
    };
    if (exec == Exec::OpenMP) {
        ErrorSlot errors;
        const auto count = static_cast<long long>(blocks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_budget())
        for (long long b = 0; b < count; ++b) {
            errors.run([&] { body(static_cast<std::size_t>(b)); });
        }
        errors.rethrow();
    } else {
        for (std::size_t b = 0; b < blocks; ++b) body(b);
    }
    Vector total = Vector::Zero(dim);
    for (const auto& v : partial) total += v;
    return total;
}

std::vector<double> map_indexed(std::size_t n, const std::function<double(std::size_t)>& f, Exec exec) {
    std::vector<double> out(n);
    if (exec == Exec::OpenMP) {
        ErrorSlot errors;
        const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_budget())
        for (long long i = 0; i < count; ++i) {
            errors.run([&] { out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i)); });
        }
        errors.rethrow();
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    }
    return out;
}

void for_each_task(std::size_t n, const std::function<void(std::size_t)>& body, int max_threads) {
    const int threads = std::max(1, max_threads);
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    ErrorSlot errors;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
        errors.run([&] { body(static_cast<std::size_t>(i)); });
    }
    errors.rethrow();
}

}  // namespace tracer::parallel
