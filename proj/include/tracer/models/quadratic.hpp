#pragma once

#include "tracer/models/model.hpp"

namespace tracer {

/// L(w) = 0.5 w^T A w - b^T w + c with A symmetric. The batch is ignored.
class QuadraticModel final : public Model {
public:
    QuadraticModel(Matrix a, Vector b, double c = 0.0);

    static QuadraticModel diagonal(const Vector& diag, Vector b, double c = 0.0);

    std::size_t num_params() const override { return static_cast<std::size_t>(b_.size()); }
    ad::Var record_loss(ad::Tape& tape, std::span<const double> w,
                        const DataBatch& batch) const override;
    std::string kind() const override { return "quadratic"; }

    const Matrix& hessian() const { return a_; }
    const Vector& linear() const { return b_; }
    double offset() const { return c_; }

    double value(const Vector& w) const { return 0.5 * w.dot(a_ * w) - b_.dot(w) + c_; }
    Vector gradient(const Vector& w) const { return a_ * w - b_; }
    /// A^{-1} b; requires A positive-definite.
    Vector minimizer() const;
    bool is_diagonal() const;

private:
    Matrix a_;
    Vector b_;
    double c_;
};

}  // namespace tracer
