#pragma once
// Reverse-mode autodiff over a flat tape of matrix primitives.
//
// Usage: build the tape (shape checking happens at construction), call
// forward() to compute values, backward(loss) to accumulate gradients into
// every node reachable from a parameter with requires_grad. Leaf parameters
// bind to external Tensor2 storage, so updating the stored values and calling
// forward() again re-evaluates the same tape.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cogbridge/tensor.hpp"

namespace cogbridge {

enum class Op : std::uint8_t {
    Leaf,
    Matmul,         // C = A * B
    Add,            // same shape
    AddColVec,      // M[i][j] + v[i][0]
    AddRowVec,      // M[i][j] + v[0][j]
    Mul,            // Hadamard
    MulRowVec,      // M[i][j] * v[0][j]
    Tanh,
    Sigmoid,
    SoftmaxRows,    // stable, per row
    LogSumExpRows,  // reduce over the row index -> 1 x cols
    MaxOverRows,    // reduce over the row index -> 1 x cols, ties to lowest row
    Transpose,
    ConcatCols,     // [A | B]
    StackRows,      // n inputs of 1 x k -> n x k
    SliceRows,      // rows [i0, i1)
    SliceCols,      // cols [i0, i1)
    GatherSum,      // sum of picked entries -> 1 x 1
    Scale,          // c * M, c constant
    FocalNll,       // -w * (1 - p_gold)^gamma * log(p_gold + 1e-12) -> 1 x 1
};

const char* op_name(Op op);

class Graph {
public:
    using NodeId = int;

    // Leaf bound to external storage; revisited on every forward().
    NodeId param(Tensor2& storage);
    // Leaf owning a copy of `value`; constant input.
    NodeId input(Tensor2 value);

    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId add_colvec(NodeId m, NodeId v);
    NodeId add_rowvec(NodeId m, NodeId v);
    NodeId mul(NodeId a, NodeId b);
    NodeId mul_rowvec(NodeId m, NodeId v);
    NodeId tanh(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId softmax_rows(NodeId a);
    NodeId logsumexp_rows(NodeId a);
    NodeId max_over_rows(NodeId a);
    NodeId transpose(NodeId a);
    NodeId concat_cols(NodeId a, NodeId b);
    NodeId stack_rows(const std::vector<NodeId>& rows);
    NodeId slice_rows(NodeId a, int r0, int r1);
    NodeId slice_cols(NodeId a, int c0, int c1);
    NodeId gather_sum(NodeId a, std::vector<std::pair<int, int>> picks);
    NodeId scale(NodeId a, double c);
    NodeId focal_nll(NodeId probs, int gold, double gamma, double weight);

    // Compute every node value in topological (construction) order.
    // Throws on non-finite output, naming the node.
    void forward();
    // Accumulate gradients from a scalar loss node. Requires forward().
    void backward(NodeId loss);

    const Tensor2& value(NodeId id) const { return nodes_[id].value; }
    // Gradient of the last backward() pass; zero tensor if untouched.
    const Tensor2& grad(NodeId id) const { return nodes_[id].grad; }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    bool forward_done() const { return forward_done_; }

private:
    struct Node {
        Op op = Op::Leaf;
        std::vector<NodeId> args;
        Tensor2 value;
        Tensor2 grad;
        Tensor2* bound = nullptr;  // Leaf params only
        bool requires_grad = false;
        double c0 = 0.0;  // Scale factor / FocalNll gamma
        double c1 = 1.0;  // FocalNll weight
        int i0 = 0;       // slice lo / FocalNll gold column
        int i1 = 0;       // slice hi
        std::vector<std::pair<int, int>> picks;
        std::vector<int> arg_rows;  // MaxOverRows argmax per column
    };

    NodeId push(Node n);
    [[noreturn]] void fail(const std::string& what, const Node& n) const;
    void compute(Node& n);
    void accumulate(Node& n);
    static void ensure_grad(Node& n);

    std::vector<Node> nodes_;
    bool forward_done_ = false;
};

}  // namespace cogbridge
