#include "tracer/autodiff/tape.hpp"

#include <cmath>
#include <string>

namespace tracer::ad {

std::string_view op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Constant: return "constant";
        case Op::MatMul: return "matmul";
        case Op::AddBias: return "add_bias";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Scale: return "scale";
        case Op::Relu: return "relu";
        case Op::Tanh: return "tanh";
        case Op::SoftmaxCrossEntropy: return "softmax_cross_entropy";
        case Op::HalfMeanSquaredError: return "half_mean_squared_error";
        case Op::Dot: return "dot";
    }
    return "unknown";
}

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::leaf(std::span<const double> w, std::size_t offset, Eigen::Index rows, Eigen::Index cols) {
    const auto count = static_cast<std::size_t>(rows * cols);
    require(offset + count <= w.size(), "leaf binding exceeds parameter vector");
    Node n = make_node(Op::Leaf);
    n.value = Eigen::Map<const Matrix>(w.data() + offset, rows, cols);
    n.offset = offset;
    return push(std::move(n));
}

Var Tape::constant(Matrix value) {
    Node n = make_node(Op::Constant);
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }

double Tape::scalar_value(Var v) const {
    const auto& m = value(v);
    require(m.rows() == 1 && m.cols() == 1, "node is not a scalar");
    return m(0, 0);
}

Var Tape::matmul(Var a, Var b) {
    require(value(a).cols() == value(b).rows(), "matmul shape mismatch");
    Node n = make_node(Op::MatMul, a.id, b.id);
    n.value = value(a) * value(b);
    return push(std::move(n));
}

Var Tape::add_bias(Var x, Var bias_row) {
    const auto& bias = value(bias_row);
    require(bias.rows() == 1 && bias.cols() == value(x).cols(), "add_bias shape mismatch");
    Node n = make_node(Op::AddBias, x.id, bias_row.id);
    n.value = value(x).rowwise() + bias.row(0);
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
            "add shape mismatch");
    Node n = make_node(Op::Add, a.id, b.id);
    n.value = value(a) + value(b);
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
            "sub shape mismatch");
    Node n = make_node(Op::Sub, a.id, b.id);
    n.value = value(a) - value(b);
    return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
    Node n = make_node(Op::Scale, a.id);
    n.factor = factor;
    n.value = factor * value(a);
    return push(std::move(n));
}

Var Tape::relu(Var a) {
    Node n = make_node(Op::Relu, a.id);
    n.value = value(a).cwiseMax(0.0);
    return push(std::move(n));
}

Var Tape::tanh(Var a) {
    Node n = make_node(Op::Tanh, a.id);
    n.value = value(a).array().tanh().matrix();
    return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const int> labels) {
    const auto& z = value(logits);
    const auto rows = z.rows();
    const auto classes = z.cols();
    require(rows >= 1, "softmax_cross_entropy needs at least one row");
    require(static_cast<Eigen::Index>(labels.size()) == rows, "label count does not match rows");
    Node n = make_node(Op::SoftmaxCrossEntropy, logits.id);
    n.labels.assign(labels.begin(), labels.end());
    n.aux.resize(rows, classes);
    double total = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= classes) {
            throw TracerError("label " + std::to_string(y) + " out of range for " +
                              std::to_string(classes) + " classes");
        }
        const double m = z.row(i).maxCoeff();
        const auto shifted = (z.row(i).array() - m).exp();
        const double s = shifted.sum();
        n.aux.row(i) = shifted / s;
        total += std::log(s) + m - z(i, y);
    }
    n.value = Matrix::Constant(1, 1, total / static_cast<double>(rows));
    return push(std::move(n));
}

Var Tape::half_mean_squared_error(Var pred, const Vector& targets) {
    const auto& y = value(pred);
    require(y.cols() == 1 && y.rows() == targets.size(), "half_mean_squared_error shape mismatch");
    require(y.rows() >= 1, "half_mean_squared_error needs at least one row");
    Node n = make_node(Op::HalfMeanSquaredError, pred.id);
    n.aux = y - targets;
    n.value = Matrix::Constant(1, 1, 0.5 * n.aux.squaredNorm() / static_cast<double>(y.rows()));
    return push(std::move(n));
}

Var Tape::dot(Var a, Var b) {
    require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
            "dot shape mismatch");
    Node n = make_node(Op::Dot, a.id, b.id);
    n.value = Matrix::Constant(1, 1, value(a).cwiseProduct(value(b)).sum());
    return push(std::move(n));
}

std::size_t Tape::backward(Var root) {
    require(root.id < nodes_.size(), "root is not on this tape");
    require(value(root).size() == 1, "backward requires a scalar root");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    nodes_[root.id].grad = Matrix::Ones(1, 1);

    auto accumulate = [this](std::size_t id, const Matrix& g) {
        auto& target = nodes_[id].grad;
        if (target.size() == 0) {
            target = g;
        } else {
            target += g;
        }
    };

    std::size_t visited = 0;
    for (std::size_t k = root.id + 1; k-- > 0;) {
        auto& n = nodes_[k];
        if (n.grad.size() == 0) continue;
        ++visited;
        const Matrix& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
            case Op::Constant:
                break;
            case Op::MatMul:
                accumulate(n.lhs, g * nodes_[n.rhs].value.transpose());
                accumulate(n.rhs, nodes_[n.lhs].value.transpose() * g);
                break;
            case Op::AddBias:
                accumulate(n.lhs, g);
                accumulate(n.rhs, g.colwise().sum());
                break;
            case Op::Add:
                accumulate(n.lhs, g);
                accumulate(n.rhs, g);
                break;
            case Op::Sub:
                accumulate(n.lhs, g);
                accumulate(n.rhs, -g);
                break;
            case Op::Scale:
                accumulate(n.lhs, n.factor * g);
                break;
            case Op::Relu:
                accumulate(n.lhs, (nodes_[n.lhs].value.array() > 0.0).select(g.array(), 0.0).matrix());
                break;
            case Op::Tanh:
                accumulate(n.lhs, (g.array() * (1.0 - n.value.array().square())).matrix());
                break;
            case Op::SoftmaxCrossEntropy: {
                Matrix d = n.aux;
                for (std::size_t i = 0; i < n.labels.size(); ++i) {
                    d(static_cast<Eigen::Index>(i), n.labels[i]) -= 1.0;
                }
                accumulate(n.lhs, (g(0, 0) / static_cast<double>(d.rows())) * d);
                break;
            }
            case Op::HalfMeanSquaredError:
                accumulate(n.lhs, (g(0, 0) / static_cast<double>(n.aux.rows())) * n.aux);
                break;
            case Op::Dot:
                accumulate(n.lhs, g(0, 0) * nodes_[n.rhs].value);
                accumulate(n.rhs, g(0, 0) * nodes_[n.lhs].value);
                break;
        }
    }
    return visited;
}

Vector Tape::leaf_gradient(std::size_t num_params) const {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(num_params));
    for (const auto& n : nodes_) {
        if (n.op != Op::Leaf || n.grad.size() == 0) continue;
        const auto count = n.grad.size();
        require(n.offset + static_cast<std::size_t>(count) <= num_params,
                "leaf binding exceeds parameter vector");
        out.segment(static_cast<Eigen::Index>(n.offset), count) +=
            Eigen::Map<const Vector>(n.grad.data(), count);
    }
    return out;
}

std::optional<std::size_t> Tape::first_non_finite() const {
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        if (!nodes_[k].value.allFinite()) return k;
    }
    return std::nullopt;
}

}  // namespace tracer::ad
