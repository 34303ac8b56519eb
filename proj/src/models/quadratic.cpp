#include "tracer/models/quadratic.hpp"

#include <cmath>

namespace tracer {

QuadraticModel::QuadraticModel(Matrix a, Vector b, double c)
    : a_(std::move(a)), b_(std::move(b)), c_(c) {
    require(a_.rows() == a_.cols(), "quadratic: A must be square");
    require(a_.rows() == b_.size(), "quadratic: A and b disagree in dimension");
    require(a_.rows() >= 1, "quadratic: dimension must be positive");
    require((a_ - a_.transpose()).cwiseAbs().maxCoeff() == 0.0, "quadratic: A must be symmetric");
    require(a_.allFinite() && b_.allFinite() && std::isfinite(c_), "quadratic: non-finite coefficients");
}

QuadraticModel QuadraticModel::diagonal(const Vector& diag, Vector b, double c) {
    return QuadraticModel(diag.asDiagonal().toDenseMatrix(), std::move(b), c);
}

ad::Var QuadraticModel::record_loss(ad::Tape& tape, std::span<const double> w,
                                    const DataBatch& /*batch*/) const {
    require(w.size() == num_params(), "quadratic: parameter length mismatch");
    const auto p = static_cast<Eigen::Index>(w.size());
    const auto x = tape.leaf(w, 0, p, 1);
    const auto ax = tape.matmul(tape.constant(a_), x);
    const auto quad = tape.scale(tape.dot(x, ax), 0.5);
    const auto lin = tape.dot(tape.constant(b_), x);
    return tape.add(tape.sub(quad, lin), tape.scalar(c_));
}

Vector QuadraticModel::minimizer() const {
    Eigen::LLT<Matrix> llt(a_);
    require(llt.info() == Eigen::Success, "quadratic: A is not positive-definite");
    return llt.solve(b_);
}

bool QuadraticModel::is_diagonal() const {
    Matrix off = a_;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace tracer
