#include "tracer/vi/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace tracer::vi {
namespace {

Eigen::LLT<Matrix> factor(const Matrix& precision) {
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) throw TracerError("precision is not positive-definite");
    return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

Matrix GaussianVariational::covariance() const {
    const auto llt = factor(precision);
    return llt.solve(Matrix::Identity(dim(), dim()));
}

double GaussianVariational::log_det_precision() const { return log_det(factor(precision)); }

void GaussianVariational::validate() const {
    require(dim() >= 1, "gaussian: empty mean");
    require(precision.rows() == dim() && precision.cols() == dim(), "gaussian: precision shape mismatch");
    require(mean.allFinite() && precision.allFinite(), "gaussian: non-finite parameters");
    require((precision - precision.transpose()).cwiseAbs().maxCoeff() <= 1e-12, "gaussian: precision not symmetric");
    factor(precision);
}

double kl_divergence(const GaussianVariational& q, const GaussianVariational& r) {
    require(q.dim() == r.dim(), "kl_divergence: dimension mismatch");
    const auto lq = factor(q.precision);
    const auto lr = factor(r.precision);
    const Matrix sigma_q = lq.solve(Matrix::Identity(q.dim(), q.dim()));
    const Vector d = r.mean - q.mean;
    const double trace_term = (r.precision.cwiseProduct(sigma_q.transpose())).sum();
    const double mahalanobis = d.dot(r.precision * d);
    return 0.5 * (trace_term + mahalanobis - static_cast<double>(q.dim()) + log_det(lq) - log_det(lr));
}

double entropy(const GaussianVariational& q) {
    const double p = static_cast<double>(q.dim());
    return 0.5 * (p * std::log(2.0 * std::numbers::pi * std::numbers::e) - q.log_det_precision());
}

FisherBlocks gaussian_fim(const GaussianVariational& q) {
    q.validate();
    const Matrix sigma = q.covariance();
    const Eigen::Index p = q.dim();
    Matrix kron(p * p, p * p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            kron.block(i * p, j * p, p, p) = sigma(i, j) * sigma;
        }
    }
    return {q.precision, 0.5 * kron};
}

}  // namespace tracer::vi
