#include "tracer/models/mlp.hpp"

#include "tracer/core/rng.hpp"

#include <cmath>

namespace tracer {

MlpModel::MlpModel(std::vector<int> layer_sizes, Activation activation, Head head)
    : sizes_(std::move(layer_sizes)), activation_(activation), head_(head) {
    require(sizes_.size() >= 2, "mlp: need at least input and output sizes");
    for (int s : sizes_) require(s >= 1, "mlp: layer sizes must be positive");
    if (head_ == Head::Regression) require(sizes_.back() == 1, "mlp: regression head has one output");
    if (head_ == Head::Classification) require(sizes_.back() >= 2, "mlp: classification needs >= 2 classes");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(num_params_);
        num_params_ += static_cast<std::size_t>(sizes_[l] + 1) * static_cast<std::size_t>(sizes_[l + 1]);
    }
}

std::size_t MlpModel::bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer]) * static_cast<std::size_t>(sizes_[layer + 1]);
}

ad::Var MlpModel::record_loss(ad::Tape& tape, std::span<const double> w,
                              const DataBatch& batch) const {
    require(w.size() == num_params_, "mlp: parameter length mismatch");
    require(batch.size() >= 1, "mlp: empty batch");
    require(batch.features() == sizes_.front(), "mlp: input width mismatch");
    auto h = tape.constant(batch.inputs);
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const auto weights = tape.leaf(w, weight_offset(l), sizes_[l], sizes_[l + 1]);
        const auto bias = tape.leaf(w, bias_offset(l), 1, sizes_[l + 1]);
        h = tape.add_bias(tape.matmul(h, weights), bias);
        if (l + 1 < num_layers()) {
            h = activation_ == Activation::Relu ? tape.relu(h) : tape.tanh(h);
        }
    }
    if (head_ == Head::Classification) {
        require(batch.num_classes == sizes_.back(), "mlp: class count mismatch");
        return tape.softmax_cross_entropy(h, batch.labels);
    }
    require(!batch.is_classification(), "mlp: regression head needs real targets");
    return tape.half_mean_squared_error(h, batch.targets);
}

Matrix MlpModel::forward(std::span<const double> w, const Matrix& inputs) const {
    require(w.size() == num_params_, "mlp: parameter length mismatch");
    require(inputs.cols() == sizes_.front(), "mlp: input width mismatch");
    Matrix h = inputs;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const Eigen::Map<const Matrix> weights(w.data() + weight_offset(l), sizes_[l], sizes_[l + 1]);
        const Eigen::Map<const Eigen::RowVectorXd> bias(w.data() + bias_offset(l), sizes_[l + 1]);
        Matrix z = h * weights;
        z.rowwise() += bias;
        if (l + 1 < num_layers()) {
            h = activation_ == Activation::Relu ? Matrix(z.cwiseMax(0.0)) : Matrix(z.array().tanh().matrix());
        } else {
            h = std::move(z);
        }
    }
    return h;
}

double MlpModel::accuracy(std::span<const double> w, const DataBatch& batch) const {
    require(head_ == Head::Classification, "mlp: accuracy needs a classification head");
    const Matrix logits = forward(w, batch.inputs);
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Eigen::Index best = 0;
        logits.row(i).maxCoeff(&best);
        if (best == batch.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

ParamVector MlpModel::initialize(std::uint64_t seed) const {
    ParamVector w = ParamVector::Zero(static_cast<Eigen::Index>(num_params_));
    CounterRng rng(derive_seed(seed, Purpose::Init));
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
        const auto count = static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]);
        for (std::size_t k = 0; k < count; ++k) {
            w(static_cast<Eigen::Index>(weight_offset(l) + k)) = rng.uniform(-limit, limit);
        }
    }
    return w;
}

std::vector<MlpModel::Layer> MlpModel::unflatten(std::span<const double> w) const {
    require(w.size() == num_params_, "mlp: parameter length mismatch");
    std::vector<Layer> layers;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        layers.push_back({Eigen::Map<const Matrix>(w.data() + weight_offset(l), sizes_[l], sizes_[l + 1]),
                          Eigen::Map<const Vector>(w.data() + bias_offset(l), sizes_[l + 1])});
    }
    return layers;
}

ParamVector MlpModel::flatten(const std::vector<Layer>& layers) const {
    require(layers.size() == num_layers(), "mlp: layer count mismatch");
    ParamVector w(static_cast<Eigen::Index>(num_params_));
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const auto& [weights, bias] = layers[l];
        require(weights.rows() == sizes_[l] && weights.cols() == sizes_[l + 1] && bias.size() == sizes_[l + 1],
                "mlp: layer shape mismatch");
        Eigen::Map<Matrix>(w.data() + weight_offset(l), sizes_[l], sizes_[l + 1]) = weights;
        Eigen::Map<Vector>(w.data() + bias_offset(l), sizes_[l + 1]) = bias;
    }
    return w;
}

MlpModel make_logistic_regression(int features, int classes) {
    return MlpModel({features, classes}, Activation::Relu, Head::Classification);
}

MlpModel make_linear_regression(int features) {
    return MlpModel({features, 1}, Activation::Relu, Head::Regression);
}

Vector diagonal_rescaling(const MlpModel& model, std::size_t layer, double alpha) {
    if (!(alpha > 0.0)) throw TracerError("rescale_diagonal: alpha must be positive");
    if (model.activation() != Activation::Relu) {
        throw TracerError("rescale_diagonal: symmetry requires a relu network");
    }
    if (layer + 1 >= model.num_layers()) {
        throw TracerError("rescale_diagonal: layer must be followed by another affine layer");
    }
    const auto& sizes = model.layer_sizes();
    Vector a = Vector::Ones(static_cast<Eigen::Index>(model.num_params()));
    const auto scaled = static_cast<Eigen::Index>(model.bias_offset(layer) + static_cast<std::size_t>(sizes[layer + 1]) -
                                                  model.weight_offset(layer));
    a.segment(static_cast<Eigen::Index>(model.weight_offset(layer)), scaled).setConstant(alpha);
    const auto next = static_cast<Eigen::Index>(sizes[layer + 1]) * sizes[layer + 2];
    a.segment(static_cast<Eigen::Index>(model.weight_offset(layer + 1)), next).setConstant(1.0 / alpha);
    return a;
}

ParamVector rescale_diagonal(const MlpModel& model, std::span<const double> w, std::size_t layer,
                             double alpha) {
    require(w.size() == model.num_params(), "rescale_diagonal: parameter length mismatch");
    const Vector a = diagonal_rescaling(model, layer, alpha);
    return Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())).cwiseProduct(a);
}

}  // namespace tracer
