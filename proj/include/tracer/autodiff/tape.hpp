#pragma once

#include "tracer/core/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace tracer::ad {

enum class Op {
    Leaf,
    Constant,
    MatMul,
    AddBias,
    Add,
    Sub,
    Scale,
    Relu,
    Tanh,
    SoftmaxCrossEntropy,
    HalfMeanSquaredError,
    Dot,
};

std::string_view op_name(Op op);

/// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
    std::size_t id;
};

/// Append-only record of matrix-valued primitives. Values are computed
/// eagerly when a node is appended; backward() sweeps the nodes once in
/// reverse order and accumulates adjoints. Leaves are bound to contiguous,
/// column-major ranges of a flat parameter vector.
class Tape {
public:
    Tape() = default;

    /// Binds rows x cols entries of `w`, starting at `offset`, as one leaf.
    Var leaf(std::span<const double> w, std::size_t offset, Eigen::Index rows, Eigen::Index cols);
    Var constant(Matrix value);
    Var scalar(double value);

    Var matmul(Var a, Var b);
    /// x (n x m) plus a 1 x m row broadcast down the rows.
    Var add_bias(Var x, Var bias_row);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double factor);
    Var relu(Var a);
    Var tanh(Var a);
    /// Mean over rows of -log softmax(logits)[label]. Labels must lie in
    /// [0, logits.cols()).
    Var softmax_cross_entropy(Var logits, std::span<const int> labels);
    /// Mean over rows of 0.5 * (pred - target)^2 for an n x 1 prediction.
    Var half_mean_squared_error(Var pred, const Vector& targets);
    /// Sum of the elementwise product, as a 1 x 1 node.
    Var dot(Var a, Var b);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    double scalar_value(Var v) const;
    std::size_t size() const { return nodes_.size(); }
    Op op(std::size_t node) const { return nodes_[node].op; }

    /// Reverse sweep from a scalar root. Returns the number of nodes visited.
    std::size_t backward(Var root);

    /// Scatters leaf adjoints into a length-p gradient vector.
    Vector leaf_gradient(std::size_t num_params) const;

    /// Index of the first node whose value has a NaN or Inf, if any.
    std::optional<std::size_t> first_non_finite() const;

private:
    struct Node {
        Op op = Op::Constant;
        std::size_t lhs = 0;
        std::size_t rhs = 0;
        Matrix value;
        Matrix grad;
        Matrix aux;
        double factor = 0.0;
        std::size_t offset = 0;
        std::vector<int> labels;
    };

    static Node make_node(Op op, std::size_t lhs = 0, std::size_t rhs = 0) {
        Node n;
        n.op = op;
        n.lhs = lhs;
        n.rhs = rhs;
        return n;
    }

    Var push(Node node);
    const Node& node(Var v) const { return nodes_[v.id]; }

    std::vector<Node> nodes_;
};

}  // namespace tracer::ad
