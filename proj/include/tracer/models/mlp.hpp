#pragma once

#include "tracer/models/model.hpp"

#include <cstdint>
#include <vector>

namespace tracer {

enum class Activation { Relu, Tanh };

/// Classification heads end in softmax cross-entropy over num_classes logits;
/// regression heads emit one output scored by half mean squared error.
enum class Head { Classification, Regression };

/// Fully connected network. Layer l maps fan_in -> fan_out as X W + b with W
/// stored fan_in x fan_out column-major in the flat parameter vector,
/// immediately followed by b. With no hidden layers this is linear or
/// logistic regression.
class MlpModel final : public Model {
public:
    MlpModel(std::vector<int> layer_sizes, Activation activation, Head head);

    std::size_t num_params() const override { return num_params_; }
    ad::Var record_loss(ad::Tape& tape, std::span<const double> w,
                        const DataBatch& batch) const override;
    std::string kind() const override { return "mlp"; }

    /// Network outputs (logits for classification), computed without a tape.
    Matrix forward(std::span<const double> w, const Matrix& inputs) const;

    /// Fraction of rows whose arg-max logit equals the label.
    double accuracy(std::span<const double> w, const DataBatch& batch) const;

    /// Uniform in +-sqrt(6 / (fan_in + fan_out)) for weights, zero biases.
    ParamVector initialize(std::uint64_t seed) const;

    struct Layer {
        Matrix weights;  ///< fan_in x fan_out
        Vector bias;     ///< fan_out
    };
    std::vector<Layer> unflatten(std::span<const double> w) const;
    ParamVector flatten(const std::vector<Layer>& layers) const;

    const std::vector<int>& layer_sizes() const { return sizes_; }
    Activation activation() const { return activation_; }
    Head head() const { return head_; }
    std::size_t num_layers() const { return sizes_.size() - 1; }
    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const;

private:
    std::vector<int> sizes_;
    Activation activation_;
    Head head_;
    std::vector<std::size_t> offsets_;
    std::size_t num_params_ = 0;
};

MlpModel make_logistic_regression(int features, int classes);
MlpModel make_linear_regression(int features);

/// Per-parameter factors a such that w -> a (.) w is the layer-wise relu
/// symmetry (W_l, b_l) -> (alpha W_l, alpha b_l), W_{l+1} -> W_{l+1} / alpha.
Vector diagonal_rescaling(const MlpModel& model, std::size_t layer, double alpha);

/// Applies the relu symmetry above. The outputs of the network are unchanged
/// for every input; the gradient is not.
ParamVector rescale_diagonal(const MlpModel& model, std::span<const double> w, std::size_t layer,
                             double alpha);

}  // namespace tracer
