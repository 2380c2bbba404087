#include "cogbridge/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "cogbridge/kernels.hpp"

namespace cogbridge {

namespace {
constexpr double kLogEps = 1e-12;
}

const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Matmul: return "matmul";
        case Op::Add: return "add";
        case Op::AddColVec: return "add_colvec";
        case Op::AddRowVec: return "add_rowvec";
        case Op::Mul: return "mul";
        case Op::MulRowVec: return "mul_rowvec";
        case Op::Tanh: return "tanh";
        case Op::Sigmoid: return "sigmoid";
        case Op::SoftmaxRows: return "softmax_rows";
        case Op::LogSumExpRows: return "logsumexp_rows";
        case Op::MaxOverRows: return "max_over_rows";
        case Op::Transpose: return "transpose";
        case Op::ConcatCols: return "concat_cols";
        case Op::StackRows: return "stack_rows";
        case Op::SliceRows: return "slice_rows";
        case Op::SliceCols: return "slice_cols";
        case Op::GatherSum: return "gather_sum";
        case Op::Scale: return "scale";
        case Op::FocalNll: return "focal_nll";
    }
    return "?";
}

void Graph::fail(const std::string& what, const Node& n) const {
    throw std::invalid_argument(std::string(op_name(n.op)) + " (node " +
                                std::to_string(nodes_.size()) + "): " + what);
}

Graph::NodeId Graph::push(Node n) {
    for (NodeId a : n.args)
        if (!n.requires_grad && nodes_[a].requires_grad) n.requires_grad = true;
    nodes_.push_back(std::move(n));
    forward_done_ = false;
    return static_cast<NodeId>(nodes_.size() - 1);
}

Graph::NodeId Graph::param(Tensor2& storage) {
    Node n;
    n.op = Op::Leaf;
    n.bound = &storage;
    n.value = storage;
    n.requires_grad = storage.requires_grad;
    return push(std::move(n));
}

Graph::NodeId Graph::input(Tensor2 value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Matmul;
    n.args = {a, b};
    const Tensor2& A = nodes_[a].value;
    const Tensor2& B = nodes_[b].value;
    if (A.cols != B.rows)
        fail("inner dimensions " + A.shape_str() + " * " + B.shape_str(), n);
    n.value = Tensor2(A.rows, B.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Add;
    n.args = {a, b};
    if (!nodes_[a].value.same_shape(nodes_[b].value))
        fail("shape " + nodes_[a].value.shape_str() + " vs " + nodes_[b].value.shape_str(), n);
    n.value = Tensor2(nodes_[a].value.rows, nodes_[a].value.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::add_colvec(NodeId m, NodeId v) {
    Node n;
    n.op = Op::AddColVec;
    n.args = {m, v};
    const Tensor2& M = nodes_[m].value;
    const Tensor2& V = nodes_[v].value;
    if (V.cols != 1 || V.rows != M.rows)
        fail("want " + std::to_string(M.rows) + "x1 vector, got " + V.shape_str(), n);
    n.value = Tensor2(M.rows, M.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::add_rowvec(NodeId m, NodeId v) {
    Node n;
    n.op = Op::AddRowVec;
    n.args = {m, v};
    const Tensor2& M = nodes_[m].value;
    const Tensor2& V = nodes_[v].value;
    if (V.rows != 1 || V.cols != M.cols)
        fail("want 1x" + std::to_string(M.cols) + " vector, got " + V.shape_str(), n);
    n.value = Tensor2(M.rows, M.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::mul(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Mul;
    n.args = {a, b};
    if (!nodes_[a].value.same_shape(nodes_[b].value))
        fail("shape " + nodes_[a].value.shape_str() + " vs " + nodes_[b].value.shape_str(), n);
    n.value = Tensor2(nodes_[a].value.rows, nodes_[a].value.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::mul_rowvec(NodeId m, NodeId v) {
    Node n;
    n.op = Op::MulRowVec;
    n.args = {m, v};
    const Tensor2& M = nodes_[m].value;
    const Tensor2& V = nodes_[v].value;
    if (V.rows != 1 || V.cols != M.cols)
        fail("want 1x" + std::to_string(M.cols) + " vector, got " + V.shape_str(), n);
    n.value = Tensor2(M.rows, M.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::tanh(NodeId a) {
    Node n;
    n.op = Op::Tanh;
    n.args = {a};
    n.value = Tensor2(nodes_[a].value.rows, nodes_[a].value.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::sigmoid(NodeId a) {
    Node n;
    n.op = Op::Sigmoid;
    n.args = {a};
    n.value = Tensor2(nodes_[a].value.rows, nodes_[a].value.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::softmax_rows(NodeId a) {
    Node n;
    n.op = Op::SoftmaxRows;
    n.args = {a};
    n.value = Tensor2(nodes_[a].value.rows, nodes_[a].value.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::logsumexp_rows(NodeId a) {
    Node n;
    n.op = Op::LogSumExpRows;
    n.args = {a};
    if (nodes_[a].value.rows < 1) fail("empty reduction", n);
    n.value = Tensor2(1, nodes_[a].value.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::max_over_rows(NodeId a) {
    Node n;
    n.op = Op::MaxOverRows;
    n.args = {a};
    if (nodes_[a].value.rows < 1) fail("empty reduction", n);
    n.value = Tensor2(1, nodes_[a].value.cols);
    n.arg_rows.assign(nodes_[a].value.cols, 0);
    return push(std::move(n));
}

Graph::NodeId Graph::transpose(NodeId a) {
    Node n;
    n.op = Op::Transpose;
    n.args = {a};
    n.value = Tensor2(nodes_[a].value.cols, nodes_[a].value.rows);
    return push(std::move(n));
}

Graph::NodeId Graph::concat_cols(NodeId a, NodeId b) {
    Node n;
    n.op = Op::ConcatCols;
    n.args = {a, b};
    const Tensor2& A = nodes_[a].value;
    const Tensor2& B = nodes_[b].value;
    if (A.rows != B.rows)
        fail("row mismatch " + A.shape_str() + " | " + B.shape_str(), n);
    n.value = Tensor2(A.rows, A.cols + B.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::stack_rows(const std::vector<NodeId>& rows) {
    Node n;
    n.op = Op::StackRows;
    n.args = rows;
    if (rows.empty()) fail("no rows", n);
    int k = nodes_[rows[0]].value.cols;
    for (NodeId r : rows) {
        const Tensor2& R = nodes_[r].value;
        if (R.rows != 1 || R.cols != k) fail("want 1x" + std::to_string(k) + " rows, got " + R.shape_str(), n);
    }
    n.value = Tensor2(static_cast<int>(rows.size()), k);
    return push(std::move(n));
}

Graph::NodeId Graph::slice_rows(NodeId a, int r0, int r1) {
    Node n;
    n.op = Op::SliceRows;
    n.args = {a};
    n.i0 = r0;
    n.i1 = r1;
    const Tensor2& A = nodes_[a].value;
    if (r0 < 0 || r1 > A.rows || r0 >= r1)
        fail("rows [" + std::to_string(r0) + "," + std::to_string(r1) + ") of " + A.shape_str(), n);
    n.value = Tensor2(r1 - r0, A.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::slice_cols(NodeId a, int c0, int c1) {
    Node n;
    n.op = Op::SliceCols;
    n.args = {a};
    n.i0 = c0;
    n.i1 = c1;
    const Tensor2& A = nodes_[a].value;
    if (c0 < 0 || c1 > A.cols || c0 >= c1)
        fail("cols [" + std::to_string(c0) + "," + std::to_string(c1) + ") of " + A.shape_str(), n);
    n.value = Tensor2(A.rows, c1 - c0);
    return push(std::move(n));
}

Graph::NodeId Graph::gather_sum(NodeId a, std::vector<std::pair<int, int>> picks) {
    Node n;
    n.op = Op::GatherSum;
    n.args = {a};
    const Tensor2& A = nodes_[a].value;
    if (picks.empty()) fail("no picks", n);
    for (auto [r, c] : picks)
        if (r < 0 || r >= A.rows || c < 0 || c >= A.cols)
            fail("pick (" + std::to_string(r) + "," + std::to_string(c) + ") of " + A.shape_str(), n);
    n.picks = std::move(picks);
    n.value = Tensor2(1, 1);
    return push(std::move(n));
}

Graph::NodeId Graph::scale(NodeId a, double c) {
    Node n;
    n.op = Op::Scale;
    n.args = {a};
    n.c0 = c;
    n.value = Tensor2(nodes_[a].value.rows, nodes_[a].value.cols);
    return push(std::move(n));
}

Graph::NodeId Graph::focal_nll(NodeId probs, int gold, double gamma, double weight) {
    Node n;
    n.op = Op::FocalNll;
    n.args = {probs};
    const Tensor2& P = nodes_[probs].value;
    if (P.rows != 1) fail("want a 1xC distribution, got " + P.shape_str(), n);
    if (gold < 0 || gold >= P.cols) fail("gold class " + std::to_string(gold) + " of " + P.shape_str(), n);
    if (gamma < 0) fail("negative gamma", n);
    if (weight <= 0) fail("non-positive class weight", n);
    n.i0 = gold;
    n.c0 = gamma;
    n.c1 = weight;
    n.value = Tensor2(1, 1);
    return push(std::move(n));
}

void Graph::compute(Node& n) {
    Tensor2& out = n.value;
    switch (n.op) {
        case Op::Leaf:
            if (n.bound) out = *n.bound;
            break;
        case Op::Matmul: {
            const Tensor2& A = nodes_[n.args[0]].value;
            const Tensor2& B = nodes_[n.args[1]].value;
            out.fill(0.0);
            for (int i = 0; i < A.rows; ++i) {
                double* ci = out.row(i);
                const double* ai = A.row(i);
                for (int k = 0; k < A.cols; ++k)
                    kernels::axpy(ai[k], B.row(k), ci, static_cast<std::size_t>(B.cols));
            }
            break;
        }
        case Op::Add:
            kernels::add(nodes_[n.args[0]].value.data.data(), nodes_[n.args[1]].value.data.data(),
                         out.data.data(), out.size());
            break;
        case Op::AddColVec: {
            const Tensor2& M = nodes_[n.args[0]].value;
            const Tensor2& V = nodes_[n.args[1]].value;
            for (int i = 0; i < M.rows; ++i) {
                const double b = V.data[i];
                const double* mi = M.row(i);
                double* oi = out.row(i);
                for (int j = 0; j < M.cols; ++j) oi[j] = mi[j] + b;
            }
            break;
        }
        case Op::AddRowVec: {
            const Tensor2& M = nodes_[n.args[0]].value;
            const Tensor2& V = nodes_[n.args[1]].value;
            for (int i = 0; i < M.rows; ++i)
                kernels::add(M.row(i), V.data.data(), out.row(i), static_cast<std::size_t>(M.cols));
            break;
        }
        case Op::Mul:
            kernels::mul(nodes_[n.args[0]].value.data.data(), nodes_[n.args[1]].value.data.data(),
                         out.data.data(), out.size());
            break;
        case Op::MulRowVec: {
            const Tensor2& M = nodes_[n.args[0]].value;
            const Tensor2& V = nodes_[n.args[1]].value;
            for (int i = 0; i < M.rows; ++i)
                kernels::mul(M.row(i), V.data.data(), out.row(i), static_cast<std::size_t>(M.cols));
            break;
        }
        case Op::Tanh: {
            const Tensor2& X = nodes_[n.args[0]].value;
            for (std::size_t i = 0; i < X.size(); ++i) out.data[i] = std::tanh(X.data[i]);
            break;
        }
        case Op::Sigmoid: {
            const Tensor2& X = nodes_[n.args[0]].value;
            for (std::size_t i = 0; i < X.size(); ++i) out.data[i] = 1.0 / (1.0 + std::exp(-X.data[i]));
            break;
        }
        case Op::SoftmaxRows: {
            const Tensor2& X = nodes_[n.args[0]].value;
            for (int i = 0; i < X.rows; ++i) {
                const double* xi = X.row(i);
                double* oi = out.row(i);
                double mx = xi[0];
                for (int j = 1; j < X.cols; ++j) mx = std::max(mx, xi[j]);
                double s = 0.0;
                for (int j = 0; j < X.cols; ++j) {
                    oi[j] = std::exp(xi[j] - mx);
                    s += oi[j];
                }
                kernels::scale(oi, 1.0 / s, oi, static_cast<std::size_t>(X.cols));
            }
            break;
        }
        case Op::LogSumExpRows: {
            const Tensor2& X = nodes_[n.args[0]].value;
            for (int j = 0; j < X.cols; ++j) {
                double mx = X.at(0, j);
                for (int i = 1; i < X.rows; ++i) mx = std::max(mx, X.at(i, j));
                double s = 0.0;
                for (int i = 0; i < X.rows; ++i) s += std::exp(X.at(i, j) - mx);
                out.data[j] = mx + std::log(s);
            }
            break;
        }
        case Op::MaxOverRows: {
            const Tensor2& X = nodes_[n.args[0]].value;
            for (int j = 0; j < X.cols; ++j) {
                int arg = 0;
                double mx = X.at(0, j);
                for (int i = 1; i < X.rows; ++i) {
                    if (X.at(i, j) > mx) {
                        mx = X.at(i, j);
                        arg = i;
                    }
                }
                out.data[j] = mx;
                n.arg_rows[j] = arg;
            }
            break;
        }
        case Op::Transpose: {
            const Tensor2& X = nodes_[n.args[0]].value;
            for (int i = 0; i < X.rows; ++i)
                for (int j = 0; j < X.cols; ++j) out.at(j, i) = X.at(i, j);
            break;
        }
        case Op::ConcatCols: {
            const Tensor2& A = nodes_[n.args[0]].value;
            const Tensor2& B = nodes_[n.args[1]].value;
            for (int i = 0; i < A.rows; ++i) {
                std::memcpy(out.row(i), A.row(i), sizeof(double) * A.cols);
                std::memcpy(out.row(i) + A.cols, B.row(i), sizeof(double) * B.cols);
            }
            break;
        }
        case Op::StackRows:
            for (std::size_t i = 0; i < n.args.size(); ++i)
                std::memcpy(out.row(static_cast<int>(i)), nodes_[n.args[i]].value.data.data(),
                            sizeof(double) * out.cols);
            break;
        case Op::SliceRows: {
            const Tensor2& X = nodes_[n.args[0]].value;
            std::memcpy(out.data.data(), X.row(n.i0), sizeof(double) * out.size());
            break;
        }
        case Op::SliceCols: {
            const Tensor2& X = nodes_[n.args[0]].value;
            for (int i = 0; i < X.rows; ++i)
                std::memcpy(out.row(i), X.row(i) + n.i0, sizeof(double) * out.cols);
            break;
        }
        case Op::GatherSum: {
            const Tensor2& X = nodes_[n.args[0]].value;
            double s = 0.0;
            for (auto [r, c] : n.picks) s += X.at(r, c);
            out.data[0] = s;
            break;
        }
        case Op::Scale:
            kernels::scale(nodes_[n.args[0]].value.data.data(), n.c0, out.data.data(), out.size());
            break;
        case Op::FocalNll: {
            const Tensor2& P = nodes_[n.args[0]].value;
            const double p = P.at(0, n.i0);
            const double base = std::max(0.0, 1.0 - p);
            out.data[0] = -n.c1 * std::pow(base, n.c0) * std::log(p + kLogEps);
            break;
        }
    }
}

void Graph::forward() {
    for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
        Node& n = nodes_[idx];
        compute(n);
        if (!all_finite(n.value))
            throw std::runtime_error(std::string("forward: non-finite output at node ") +
                                     std::to_string(idx) + " (" + op_name(n.op) + ")");
    }
    forward_done_ = true;
}

void Graph::ensure_grad(Node& n) {
    if (n.grad.rows != n.value.rows || n.grad.cols != n.value.cols)
        n.grad = Tensor2(n.value.rows, n.value.cols);
}

void Graph::accumulate(Node& n) {
    const Tensor2& g = n.grad;
    auto needs = [&](int slot) { return nodes_[n.args[slot]].requires_grad; };
    auto arg_grad = [&](int slot) -> Tensor2& { return nodes_[n.args[slot]].grad; };
    auto arg_val = [&](int slot) -> const Tensor2& { return nodes_[n.args[slot]].value; };

    switch (n.op) {
        case Op::Leaf:
            break;
        case Op::Matmul: {
            const Tensor2& A = arg_val(0);
            const Tensor2& B = arg_val(1);
            if (needs(0)) {
                Tensor2& dA = arg_grad(0);
                for (int i = 0; i < A.rows; ++i) {
                    double* dai = dA.row(i);
                    const double* gi = g.row(i);
                    for (int k = 0; k < A.cols; ++k)
                        dai[k] += kernels::dot(gi, B.row(k), static_cast<std::size_t>(B.cols));
                }
            }
            if (needs(1)) {
                Tensor2& dB = arg_grad(1);
                for (int i = 0; i < A.rows; ++i) {
                    const double* ai = A.row(i);
                    const double* gi = g.row(i);
                    for (int k = 0; k < A.cols; ++k)
                        kernels::axpy(ai[k], gi, dB.row(k), static_cast<std::size_t>(B.cols));
                }
            }
            break;
        }
        case Op::Add:
            for (int slot = 0; slot < 2; ++slot)
                if (needs(slot))
                    kernels::axpy(1.0, g.data.data(), arg_grad(slot).data.data(), g.size());
            break;
        case Op::AddColVec: {
            if (needs(0)) kernels::axpy(1.0, g.data.data(), arg_grad(0).data.data(), g.size());
            if (needs(1)) {
                Tensor2& dv = arg_grad(1);
                for (int i = 0; i < g.rows; ++i)
                    dv.data[i] += kernels::sum(g.row(i), static_cast<std::size_t>(g.cols));
            }
            break;
        }
        case Op::AddRowVec: {
            if (needs(0)) kernels::axpy(1.0, g.data.data(), arg_grad(0).data.data(), g.size());
            if (needs(1)) {
                Tensor2& dv = arg_grad(1);
                for (int i = 0; i < g.rows; ++i)
                    kernels::axpy(1.0, g.row(i), dv.data.data(), static_cast<std::size_t>(g.cols));
            }
            break;
        }
        case Op::Mul: {
            for (int slot = 0; slot < 2; ++slot) {
                if (!needs(slot)) continue;
                const Tensor2& other = arg_val(1 - slot);
                Tensor2& d = arg_grad(slot);
                for (std::size_t i = 0; i < g.size(); ++i) d.data[i] += g.data[i] * other.data[i];
            }
            break;
        }
        case Op::MulRowVec: {
            const Tensor2& M = arg_val(0);
            const Tensor2& V = arg_val(1);
            if (needs(0)) {
                Tensor2& dM = arg_grad(0);
                for (int i = 0; i < g.rows; ++i) {
                    const double* gi = g.row(i);
                    double* di = dM.row(i);
                    for (int j = 0; j < g.cols; ++j) di[j] += gi[j] * V.data[j];
                }
            }
            if (needs(1)) {
                Tensor2& dV = arg_grad(1);
                for (int i = 0; i < g.rows; ++i) {
                    const double* gi = g.row(i);
                    const double* mi = M.row(i);
                    for (int j = 0; j < g.cols; ++j) dV.data[j] += gi[j] * mi[j];
                }
            }
            break;
        }
        case Op::Tanh: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = n.value.data[i];
                d.data[i] += g.data[i] * (1.0 - y * y);
            }
            break;
        }
        case Op::Sigmoid: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = n.value.data[i];
                d.data[i] += g.data[i] * y * (1.0 - y);
            }
            break;
        }
        case Op::SoftmaxRows: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            for (int i = 0; i < g.rows; ++i) {
                const double* pi = n.value.row(i);
                const double* gi = g.row(i);
                double* di = d.row(i);
                const double inner = kernels::dot(gi, pi, static_cast<std::size_t>(g.cols));
                for (int j = 0; j < g.cols; ++j) di[j] += pi[j] * (gi[j] - inner);
            }
            break;
        }
        case Op::LogSumExpRows: {
            if (!needs(0)) break;
            const Tensor2& X = arg_val(0);
            Tensor2& d = arg_grad(0);
            for (int j = 0; j < X.cols; ++j) {
                const double gj = g.data[j];
                const double yj = n.value.data[j];
                for (int i = 0; i < X.rows; ++i) d.at(i, j) += gj * std::exp(X.at(i, j) - yj);
            }
            break;
        }
        case Op::MaxOverRows: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            for (int j = 0; j < g.cols; ++j) d.at(n.arg_rows[j], j) += g.data[j];
            break;
        }
        case Op::Transpose: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) d.at(j, i) += g.at(i, j);
            break;
        }
        case Op::ConcatCols: {
            const Tensor2& A = arg_val(0);
            if (needs(0)) {
                Tensor2& dA = arg_grad(0);
                for (int i = 0; i < g.rows; ++i)
                    kernels::axpy(1.0, g.row(i), dA.row(i), static_cast<std::size_t>(A.cols));
            }
            if (needs(1)) {
                Tensor2& dB = arg_grad(1);
                for (int i = 0; i < g.rows; ++i)
                    kernels::axpy(1.0, g.row(i) + A.cols, dB.row(i),
                                  static_cast<std::size_t>(g.cols - A.cols));
            }
            break;
        }
        case Op::StackRows:
            for (std::size_t r = 0; r < n.args.size(); ++r) {
                Node& a = nodes_[n.args[r]];
                if (!a.requires_grad) continue;
                kernels::axpy(1.0, g.row(static_cast<int>(r)), a.grad.data.data(),
                              static_cast<std::size_t>(g.cols));
            }
            break;
        case Op::SliceRows: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            kernels::axpy(1.0, g.data.data(), d.row(n.i0), g.size());
            break;
        }
        case Op::SliceCols: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            for (int i = 0; i < g.rows; ++i)
                kernels::axpy(1.0, g.row(i), d.row(i) + n.i0, static_cast<std::size_t>(g.cols));
            break;
        }
        case Op::GatherSum: {
            if (!needs(0)) break;
            Tensor2& d = arg_grad(0);
            for (auto [r, c] : n.picks) d.at(r, c) += g.data[0];
            break;
        }
        case Op::Scale:
            if (needs(0)) kernels::axpy(n.c0, g.data.data(), arg_grad(0).data.data(), g.size());
            break;
        case Op::FocalNll: {
            if (!needs(0)) break;
            const Tensor2& P = arg_val(0);
            const double p = P.at(0, n.i0);
            const double base = std::max(0.0, 1.0 - p);
            const double pe = p + kLogEps;
            double dp = -n.c1 * std::pow(base, n.c0) / pe;
            if (n.c0 > 0.0) dp += n.c1 * n.c0 * std::pow(base, n.c0 - 1.0) * std::log(pe);
            arg_grad(0).at(0, n.i0) += g.data[0] * dp;
            break;
        }
    }
}

void Graph::backward(NodeId loss) {
    if (!forward_done_)
        throw std::logic_error("backward: forward() has not been run on this graph");
    Node& ln = nodes_[loss];
    if (ln.value.rows != 1 || ln.value.cols != 1)
        throw std::invalid_argument("backward: loss node is " + ln.value.shape_str() + ", want 1x1");

    for (Node& n : nodes_) {
        if (!n.requires_grad) continue;
        ensure_grad(n);
        n.grad.fill(0.0);
    }
    if (!ln.requires_grad) {
        ensure_grad(ln);
        ln.grad.fill(0.0);
        return;  // nothing reaches a trainable parameter
    }
    ln.grad.data[0] = 1.0;

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
        if (it->requires_grad) accumulate(*it);
}

}  // namespace cogbridge
