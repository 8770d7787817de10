#include "hlsdse/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace hlsdse {

namespace {
int g_threads = 1;
}

void set_compute_threads(int n) {
    g_threads = n < 1 ? 1 : n;
    // Parallelism happens at the batch-chunk level with an ordered
    // reduction; Eigen itself stays single-threaded.
    Eigen::setNbThreads(1);
}

int compute_threads() { return g_threads; }

Tape::VarId Tape::make(Matrix value, bool needs_grad, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<VarId>(nodes_.size()) - 1;
}

Matrix& Tape::grad_ref(VarId id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

Tape::VarId Tape::input(Matrix value) { return make(std::move(value), false); }

Tape::VarId Tape::param(Matrix value) { return make(std::move(value), true); }

Tape::VarId Tape::linear(VarId w, VarId b, VarId x) {
    const Matrix& W = nodes_[w].value;
    const Matrix& B = nodes_[b].value;
    const Matrix& X = nodes_[x].value;
    if (W.cols() != X.cols() || B.rows() != W.rows() || B.cols() != 1)
        throw std::invalid_argument("linear: width mismatch");
    Matrix y = X * W.transpose();
    y.rowwise() += B.col(0).transpose();
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, w, b, x] {
        const Matrix& dy = nodes_[id].grad;
        grad_ref(w).noalias() += dy.transpose() * nodes_[x].value;
        grad_ref(b).col(0) += dy.colwise().sum().transpose();
        grad_ref(x).noalias() += dy * nodes_[w].value;
    };
    return id;
}

Tape::VarId Tape::elu(VarId x) {
    const Matrix& X = nodes_[x].value;
    Matrix y = (X.array().max(0.0) + (X.array().min(0.0).exp() - 1.0)).matrix();
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, x] {
        const Matrix& dy = nodes_[id].grad;
        const Matrix& X = nodes_[x].value;
        const Matrix& Y = nodes_[id].value;
        // d/dx is 1 for x > 0 and exp(x) = y + 1 otherwise
        grad_ref(x).array() +=
            dy.array() * (X.array() > 0).select(Matrix::Ones(X.rows(), X.cols()),
                                                Y.array() + 1.0).array();
    };
    return id;
}

Tape::VarId Tape::leaky_relu(VarId x, double slope) {
    const Matrix& X = nodes_[x].value;
    Matrix y = X.unaryExpr([slope](double v) { return v >= 0 ? v : slope * v; });
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, x, slope] {
        const Matrix& dy = nodes_[id].grad;
        const Matrix& X = nodes_[x].value;
        grad_ref(x).array() +=
            dy.array() * (X.array() >= 0).select(Matrix::Ones(X.rows(), X.cols()),
                                                 Matrix::Constant(X.rows(), X.cols(), slope))
                             .array();
    };
    return id;
}

Tape::VarId Tape::relu(VarId x) {
    const Matrix& X = nodes_[x].value;
    Matrix y = X.cwiseMax(0.0);
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, x] {
        const Matrix& dy = nodes_[id].grad;
        const Matrix& X = nodes_[x].value;
        grad_ref(x).array() += dy.array() * (X.array() > 0).cast<double>();
    };
    return id;
}

Tape::VarId Tape::concat_cols(VarId a, VarId b) {
    const Matrix& A = nodes_[a].value;
    const Matrix& B = nodes_[b].value;
    if (A.rows() != B.rows()) throw std::invalid_argument("concat_cols: row mismatch");
    Matrix y(A.rows(), A.cols() + B.cols());
    y << A, B;
    VarId id = make(std::move(y), true);
    const int ca = static_cast<int>(A.cols());
    nodes_[id].back = [this, id, a, b, ca] {
        const Matrix& dy = nodes_[id].grad;
        grad_ref(a) += dy.leftCols(ca);
        grad_ref(b) += dy.rightCols(dy.cols() - ca);
    };
    return id;
}

Tape::VarId Tape::gather_rows(VarId x, std::vector<int> rows) {
    const Matrix& X = nodes_[x].value;
    Matrix y(static_cast<int>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) y.row(i) = X.row(rows[i]);
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, x, rows = std::move(rows)] {
        const Matrix& dy = nodes_[id].grad;
        Matrix& dx = grad_ref(x);
        for (std::size_t i = 0; i < rows.size(); ++i) dx.row(rows[i]) += dy.row(i);
    };
    return id;
}

Tape::VarId Tape::mean_by_dst(VarId messages, std::vector<int> dst, int num_nodes) {
    const Matrix& M = nodes_[messages].value;
    std::vector<double> count(num_nodes, 0.0);
    for (int d : dst) count[d] += 1.0;
    Matrix y = Matrix::Zero(num_nodes, M.cols());
    for (std::size_t e = 0; e < dst.size(); ++e) y.row(dst[e]) += M.row(e);
    for (int i = 0; i < num_nodes; ++i)
        if (count[i] > 0) y.row(i) /= count[i];
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, messages, dst = std::move(dst), count = std::move(count)] {
        const Matrix& dy = nodes_[id].grad;
        Matrix& dm = grad_ref(messages);
        for (std::size_t e = 0; e < dst.size(); ++e)
            dm.row(e) += dy.row(dst[e]) / count[dst[e]];
    };
    return id;
}

Tape::VarId Tape::segment_softmax(VarId scores, const BatchSegments& seg) {
    const Matrix& S = nodes_[scores].value;
    Matrix y(S.rows(), S.cols());
    for (int g = 0; g < seg.num_graphs(); ++g) {
        const int lo = seg.node_offset[g];
        const int n = seg.node_offset[g + 1] - lo;
        for (int h = 0; h < S.cols(); ++h) {
            const double mx = S.block(lo, h, n, 1).maxCoeff();
            Eigen::ArrayXd ex = (S.block(lo, h, n, 1).array() - mx).exp();
            y.block(lo, h, n, 1) = ex / ex.sum();
        }
    }
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, scores, seg] {
        const Matrix& dy = nodes_[id].grad;
        const Matrix& Y = nodes_[id].value;
        Matrix& ds = grad_ref(scores);
        for (int g = 0; g < seg.num_graphs(); ++g) {
            const int lo = seg.node_offset[g];
            const int n = seg.node_offset[g + 1] - lo;
            for (int h = 0; h < Y.cols(); ++h) {
                const double dot = (dy.block(lo, h, n, 1).array() *
                                    Y.block(lo, h, n, 1).array()).sum();
                ds.block(lo, h, n, 1).array() +=
                    Y.block(lo, h, n, 1).array() *
                    (dy.block(lo, h, n, 1).array() - dot);
            }
        }
    };
    return id;
}

Tape::VarId Tape::attention_pool(VarId scores, VarId feats, const BatchSegments& seg) {
    const Matrix& S = nodes_[scores].value;
    const Matrix& P = nodes_[feats].value;
    const int heads = static_cast<int>(S.cols());
    const int d = static_cast<int>(P.cols());
    Matrix y = Matrix::Zero(seg.num_graphs(), heads * d);
    for (int g = 0; g < seg.num_graphs(); ++g)
        for (int i = seg.node_offset[g]; i < seg.node_offset[g + 1]; ++i)
            for (int h = 0; h < heads; ++h)
                y.block(g, h * d, 1, d) += S(i, h) * P.row(i);
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, scores, feats, seg, heads, d] {
        const Matrix& dy = nodes_[id].grad;
        const Matrix& S = nodes_[scores].value;
        const Matrix& P = nodes_[feats].value;
        Matrix& ds = grad_ref(scores);
        Matrix& dp = grad_ref(feats);
        for (int g = 0; g < seg.num_graphs(); ++g)
            for (int i = seg.node_offset[g]; i < seg.node_offset[g + 1]; ++i)
                for (int h = 0; h < heads; ++h) {
                    ds(i, h) += dy.block(g, h * d, 1, d).cwiseProduct(P.row(i)).sum();
                    dp.row(i) += S(i, h) * dy.block(g, h * d, 1, d);
                }
    };
    return id;
}

Tape::VarId Tape::broadcast_rows(VarId per_graph, const BatchSegments& seg) {
    const Matrix& U = nodes_[per_graph].value;
    Matrix y(seg.num_nodes(), U.cols());
    for (int i = 0; i < seg.num_nodes(); ++i) y.row(i) = U.row(seg.node_graph[i]);
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, per_graph, seg] {
        const Matrix& dy = nodes_[id].grad;
        Matrix& du = grad_ref(per_graph);
        for (int i = 0; i < seg.num_nodes(); ++i) du.row(seg.node_graph[i]) += dy.row(i);
    };
    return id;
}

Tape::VarId Tape::segment_sum(VarId x, const BatchSegments& seg) {
    const Matrix& X = nodes_[x].value;
    Matrix y = Matrix::Zero(seg.num_graphs(), X.cols());
    for (int i = 0; i < seg.num_nodes(); ++i) y.row(seg.node_graph[i]) += X.row(i);
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, x, seg] {
        const Matrix& dy = nodes_[id].grad;
        Matrix& dx = grad_ref(x);
        for (int i = 0; i < seg.num_nodes(); ++i) dx.row(i) += dy.row(seg.node_graph[i]);
    };
    return id;
}

Tape::VarId Tape::mean_abs_error(VarId pred, Matrix target) {
    const Matrix& P = nodes_[pred].value;
    if (P.rows() != target.rows() || P.cols() != target.cols())
        throw std::invalid_argument("mean_abs_error: shape mismatch");
    const double n = static_cast<double>(P.size());
    Matrix diff = P - target;
    Matrix y(1, 1);
    y(0, 0) = diff.array().abs().sum() / n;
    VarId id = make(std::move(y), true);
    nodes_[id].back = [this, id, pred, diff = std::move(diff), n] {
        const double dl = nodes_[id].grad(0, 0);
        grad_ref(pred).array() +=
            (dl / n) * diff.array().unaryExpr([](double v) {
                return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
            });
    };
    return id;
}

void Tape::backward(VarId scalar_loss) {
    if (nodes_[scalar_loss].value.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar");
    grad_ref(scalar_loss)(0, 0) = 1.0;
    for (int i = scalar_loss; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.back && n.grad.size() != 0) n.back();
    }
}

}  // namespace hlsdse
