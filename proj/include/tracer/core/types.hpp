#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>

namespace tracer {

/// Flat parameter vector w. Its length p is fixed for the lifetime of a model.
using ParamVector = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class TracerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a loss, gradient or update leaves the finite reals.
class NonFiniteError : public TracerError {
public:
    using TracerError::TracerError;
};

inline std::span<const double> view(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require(bool condition, const std::string& message) {
    if (!condition) throw TracerError(message);
}

}  // namespace tracer
