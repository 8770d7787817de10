// tape.hpp — reverse-mode automatic differentiation over batched graphs
//
// A Tape records matrix-valued operations and replays them backwards to
// produce exact gradients. The op set is only what the models here need:
// dense layers, pointwise activations, concatenation, edge gather /
// mean-aggregation, per-graph softmax and pooling. Batches stack the nodes
// and edges of several graphs; segment ops respect graph boundaries.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace hlsdse {

using Matrix = Eigen::MatrixXd;

struct BatchSegments {
    std::vector<int> node_graph;   // graph index per node row
    std::vector<int> node_offset;  // row range per graph, size B+1
    std::vector<int> edge_src;     // global node row per edge
    std::vector<int> edge_dst;

    int num_graphs() const { return static_cast<int>(node_offset.size()) - 1; }
    int num_nodes() const { return static_cast<int>(node_graph.size()); }
    int num_edges() const { return static_cast<int>(edge_src.size()); }
};

class Tape {
public:
    using VarId = int;

    VarId input(Matrix value);  // leaf without gradient
    VarId param(Matrix value);  // leaf with gradient

    const Matrix& value(VarId id) const { return nodes_[id].value; }
    const Matrix& grad(VarId id) const { return nodes_[id].grad; }

    // Y = X * W^T + 1 * b^T     (W: out x in, b: out x 1, X: n x in)
    VarId linear(VarId w, VarId b, VarId x);
    VarId elu(VarId x);
    VarId leaky_relu(VarId x, double slope);
    VarId relu(VarId x);
    VarId concat_cols(VarId a, VarId b);
    VarId gather_rows(VarId x, std::vector<int> rows);
    // Per-node mean of incoming edge messages; zero vector for nodes
    // without incoming edges.
    VarId mean_by_dst(VarId messages, std::vector<int> dst, int num_nodes);
    // Column-wise softmax within each graph segment, max-subtracted.
    VarId segment_softmax(VarId scores, const BatchSegments& seg);
    // out(g, h*d..h*d+d) = sum_{i in g} scores(i,h) * feats(i, :)
    VarId attention_pool(VarId scores, VarId feats, const BatchSegments& seg);
    VarId broadcast_rows(VarId per_graph, const BatchSegments& seg);  // B x d -> N x d
    VarId segment_sum(VarId x, const BatchSegments& seg);             // N x d -> B x d
    // Mean absolute error over all entries; 1x1 result. The |.| subgradient
    // at 0 is taken to be 0.
    VarId mean_abs_error(VarId pred, Matrix target);

    void backward(VarId scalar_loss);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void()> back;
        bool needs_grad = false;
    };

    VarId make(Matrix value, bool needs_grad, std::function<void()> back = nullptr);
    Matrix& grad_ref(VarId id);

    std::vector<Node> nodes_;
};

// Number of threads Eigen may use for dense products (also honored by the
// training loop when splitting batches). Deterministic for a fixed value.
void set_compute_threads(int n);
int compute_threads();

}  // namespace hlsdse
