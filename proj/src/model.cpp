#include "hlsdse/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace hlsdse {

std::array<double, 4> Prediction::delogged() const {
    std::array<double, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = std::max(0.0, std::expm1(log[i]));
    return out;
}

std::array<double, 4> to_log_targets(const std::array<double, 4>& target) {
    std::array<double, 4> out;
    for (int i = 0; i < 4; ++i) {
        if (target[i] < 0) throw std::invalid_argument("negative regression target");
        out[i] = std::log1p(target[i]);
    }
    return out;
}

double prediction_loss(const Prediction& pred, const std::array<double, 4>& target) {
    const auto t = to_log_targets(target);
    double acc = 0;
    for (int i = 0; i < 4; ++i) acc += std::abs(pred.log[i] - t[i]);
    return acc / 4.0;
}

Matrix& ParamStore::add(const std::string& name, int rows, int cols) {
    if (index_.count(name)) throw std::logic_error("duplicate tensor " + name);
    index_[name] = static_cast<int>(tensors_.size());
    tensors_.emplace_back(name, Matrix::Zero(rows, cols));
    return tensors_.back().second;
}

Matrix& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no tensor " + name);
    return tensors_[it->second].second;
}

const Matrix& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no tensor " + name);
    return tensors_[it->second].second;
}

bool ParamStore::has(const std::string& name) const { return index_.count(name) > 0; }

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (const auto& [name, m] : tensors_) n += static_cast<std::size_t>(m.size());
    return n;
}

ParamStore ParamStore::zeros_like() const {
    ParamStore out;
    for (const auto& [name, m] : tensors_)
        out.add(name, static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    return out;
}

GraphBatch make_batch(const std::vector<const EncodedGraph*>& graphs,
                      const std::vector<std::array<double, 4>>* targets) {
    GraphBatch b;
    int total_nodes = 0, total_edges = 0;
    for (const auto* g : graphs) {
        total_nodes += static_cast<int>(g->node_features.rows());
        total_edges += static_cast<int>(g->edge_features.rows());
    }
    const int B = static_cast<int>(graphs.size());
    const int node_w = B > 0 ? static_cast<int>(graphs[0]->node_features.cols()) : 0;
    b.node_features.resize(total_nodes, node_w);
    b.edge_features.resize(total_edges, kEdgeKindCount);
    b.globals.resize(B, FeatureSchema::global_width());
    b.seg.node_offset.assign(1, 0);
    int nrow = 0, erow = 0;
    for (int g = 0; g < B; ++g) {
        const EncodedGraph& eg = *graphs[g];
        const int n = static_cast<int>(eg.node_features.rows());
        b.node_features.middleRows(nrow, n) = eg.node_features;
        for (int i = 0; i < n; ++i) b.seg.node_graph.push_back(g);
        const int m = static_cast<int>(eg.edge_features.rows());
        if (m > 0) b.edge_features.middleRows(erow, m) = eg.edge_features;
        for (int e = 0; e < m; ++e) {
            b.seg.edge_src.push_back(nrow + eg.edge_src[e]);
            b.seg.edge_dst.push_back(nrow + eg.edge_dst[e]);
        }
        b.globals.row(g) = eg.global_features.transpose();
        nrow += n;
        erow += m;
        b.seg.node_offset.push_back(nrow);
    }
    if (targets) {
        b.targets_log.resize(B, 4);
        for (int g = 0; g < B; ++g) {
            const auto t = to_log_targets((*targets)[g]);
            for (int k = 0; k < 4; ++k) b.targets_log(g, k) = t[k];
        }
    }
    return b;
}

namespace {

// Glorot-uniform init in creation order, biases zero.
struct Initializer {
    std::mt19937_64 rng;
    explicit Initializer(std::uint64_t seed) : rng(seed) {}

    double uniform() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    }

    void glorot(Matrix& w) {
        const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = (2.0 * uniform() - 1.0) * a;
    }
};

// One hidden nonlinear layer plus a linear output layer.
void add_mlp(ParamStore& ps, Initializer& init, const std::string& name, int in, int hidden,
             int out) {
    ps.add(name + ".w1", hidden, in);
    ps.add(name + ".b1", hidden, 1);
    ps.add(name + ".w2", out, hidden);
    ps.add(name + ".b2", out, 1);
    init.glorot(ps.at(name + ".w1"));
    init.glorot(ps.at(name + ".w2"));
}

struct TapeParams {
    std::map<std::string, Tape::VarId> byname;
    Tape::VarId operator()(const std::string& name) const { return byname.at(name); }
};

TapeParams register_params(Tape& tape, const Model& model,
                           std::vector<std::pair<std::string, Tape::VarId>>* param_vars) {
    TapeParams tp;
    for (const auto& [name, m] : model.params.tensors()) {
        Tape::VarId id = tape.param(m);
        tp.byname[name] = id;
        if (param_vars) param_vars->emplace_back(name, id);
    }
    return tp;
}

Tape::VarId run_mlp(Tape& tape, const TapeParams& tp, const std::string& name, Tape::VarId x) {
    Tape::VarId h = tape.elu(tape.linear(tp(name + ".w1"), tp(name + ".b1"), x));
    return tape.linear(tp(name + ".w2"), tp(name + ".b2"), h);
}

// Attention block shared by the propagation layers and the head: softmaxed
// per-head scores from [u || v_score], applied to psi(v_feats).
Tape::VarId attention_block(Tape& tape, const TapeParams& tp, const std::string& alpha_name,
                            const std::string& psi_name, const Model& model,
                            const GraphBatch& batch, Tape::VarId u, Tape::VarId v_score,
                            Tape::VarId v_feats, Matrix* scores_out) {
    Tape::VarId ub = tape.broadcast_rows(u, batch.seg);
    Tape::VarId logits = tape.leaky_relu(
        run_mlp(tape, tp, alpha_name, tape.concat_cols(ub, v_score)),
        model.hp.attention_slope);
    Tape::VarId scores = tape.segment_softmax(logits, batch.seg);
    if (scores_out) *scores_out = tape.value(scores);
    Tape::VarId p = run_mlp(tape, tp, psi_name, v_feats);
    return tape.attention_pool(scores, p, batch.seg);
}

Tape::VarId gnn_forward(Tape& tape, const Model& model, const GraphBatch& batch,
                        const TapeParams& tp, ForwardTrace* trace) {
    Tape::VarId x = tape.input(batch.node_features);
    Tape::VarId e = tape.input(batch.edge_features);
    Tape::VarId g = tape.input(batch.globals);

    Tape::VarId v = run_mlp(tape, tp, "enc_v", x);
    Tape::VarId e_enc = run_mlp(tape, tp, "enc_e", e);
    Tape::VarId u = run_mlp(tape, tp, "enc_u", g);
    if (trace) {
        trace->v0 = tape.value(v);
        trace->e_enc = tape.value(e_enc);
        trace->u0 = tape.value(u);
    }

    for (int t = 1; t <= model.hp.propagation_layers; ++t) {
        const std::string prefix = "prop" + std::to_string(t);
        Tape::VarId src = tape.gather_rows(v, batch.seg.edge_src);
        Tape::VarId msg = run_mlp(tape, tp, prefix + ".psi_v", tape.concat_cols(src, e_enc));
        Tape::VarId agg = tape.mean_by_dst(msg, batch.seg.edge_dst, batch.seg.num_nodes());
        Tape::VarId v_new = run_mlp(tape, tp, prefix + ".tau_v", tape.concat_cols(v, agg));

        Matrix scores;
        Tape::VarId pooled =
            attention_block(tape, tp, prefix + ".alpha", prefix + ".psi_u", model, batch, u,
                            v_new, v, trace ? &scores : nullptr);
        u = run_mlp(tape, tp, prefix + ".tau_u", tape.concat_cols(u, pooled));
        v = v_new;
        if (trace) {
            trace->v.push_back(tape.value(v));
            trace->u.push_back(tape.value(u));
            trace->scores.push_back(std::move(scores));
        }
    }

    Matrix head_scores;
    Tape::VarId pooled = attention_block(tape, tp, "head.alpha", "head.psi", model, batch,
                                         u, v, v, trace ? &head_scores : nullptr);
    Tape::VarId pred = run_mlp(tape, tp, "head.out", tape.concat_cols(u, pooled));
    if (trace) {
        trace->head_scores = std::move(head_scores);
        trace->pred = tape.value(pred);
    }
    return pred;
}

Tape::VarId deepsets_forward(Tape& tape, const Model& model, const GraphBatch& batch,
                             const TapeParams& tp, ForwardTrace* trace) {
    Tape::VarId h = tape.input(batch.node_features);
    for (int l = 1; l <= model.hp.ds_layers; ++l) {
        const std::string name = "node" + std::to_string(l);
        h = tape.relu(tape.linear(tp(name + ".w"), tp(name + ".b"), h));
    }
    Tape::VarId agg = tape.segment_sum(h, batch.seg);
    Tape::VarId g = tape.concat_cols(agg, tape.input(batch.globals));
    Tape::VarId hidden = tape.relu(tape.linear(tp("global1.w"), tp("global1.b"), g));
    Tape::VarId pred = tape.linear(tp("global2.w"), tp("global2.b"), hidden);
    if (trace) trace->pred = tape.value(pred);
    return pred;
}

}  // namespace

Model Model::init_gnn(int node_in, const Hyperparams& hp, std::uint64_t fingerprint,
                      std::uint64_t seed) {
    Model m;
    m.kind = ModelKind::Gnn;
    m.hp = hp;
    m.node_in = node_in;
    m.schema_fingerprint = fingerprint;
    Initializer init(seed);
    const int nh = hp.node_hidden;
    const int gh = hp.global_hidden;
    const int ah = hp.attention_hidden;
    const int heads = hp.attention_heads;
    add_mlp(m.params, init, "enc_v", node_in, nh, nh);
    add_mlp(m.params, init, "enc_e", kEdgeKindCount, nh, nh);
    add_mlp(m.params, init, "enc_u", FeatureSchema::global_width(), gh, gh);
    for (int t = 1; t <= hp.propagation_layers; ++t) {
        const std::string p = "prop" + std::to_string(t);
        add_mlp(m.params, init, p + ".psi_v", nh + nh, nh, nh);
        add_mlp(m.params, init, p + ".tau_v", nh + nh, nh, nh);
        add_mlp(m.params, init, p + ".alpha", gh + nh, ah, heads);
        add_mlp(m.params, init, p + ".psi_u", nh, gh, gh);
        add_mlp(m.params, init, p + ".tau_u", gh + heads * gh, gh, gh);
    }
    add_mlp(m.params, init, "head.alpha", gh + nh, ah, heads);
    add_mlp(m.params, init, "head.psi", nh, gh, gh);
    add_mlp(m.params, init, "head.out", gh + heads * gh, gh, hp.head_outputs);
    return m;
}

Model Model::init_deepsets(int node_in, const Hyperparams& hp, std::uint64_t fingerprint,
                           std::uint64_t seed) {
    Model m;
    m.kind = ModelKind::DeepSets;
    m.hp = hp;
    m.node_in = node_in;
    m.schema_fingerprint = fingerprint;
    Initializer init(seed);
    int in = node_in;
    for (int l = 1; l <= hp.ds_layers; ++l) {
        const std::string name = "node" + std::to_string(l);
        m.params.add(name + ".w", hp.ds_hidden, in);
        m.params.add(name + ".b", hp.ds_hidden, 1);
        init.glorot(m.params.at(name + ".w"));
        in = hp.ds_hidden;
    }
    m.params.add("global1.w", hp.ds_hidden, hp.ds_hidden + FeatureSchema::global_width());
    m.params.add("global1.b", hp.ds_hidden, 1);
    m.params.add("global2.w", hp.head_outputs, hp.ds_hidden);
    m.params.add("global2.b", hp.head_outputs, 1);
    init.glorot(m.params.at("global1.w"));
    init.glorot(m.params.at("global2.w"));
    return m;
}

Tape::VarId model_forward(Tape& tape, const Model& model, const GraphBatch& batch,
                          std::vector<std::pair<std::string, Tape::VarId>>* param_vars) {
    if (batch.node_features.cols() != model.node_in)
        throw std::invalid_argument("node feature width does not match the model");
    TapeParams tp = register_params(tape, model, param_vars);
    return model.kind == ModelKind::Gnn ? gnn_forward(tape, model, batch, tp, nullptr)
                                        : deepsets_forward(tape, model, batch, tp, nullptr);
}

std::vector<Prediction> predict(const Model& model, const GraphBatch& batch) {
    Tape tape;
    Tape::VarId pred = model_forward(tape, model, batch);
    const Matrix& P = tape.value(pred);
    std::vector<Prediction> out(P.rows());
    for (int i = 0; i < P.rows(); ++i)
        for (int k = 0; k < 4; ++k) out[i].log[k] = P(i, k);
    return out;
}

Prediction predict_one(const Model& model, const EncodedGraph& graph) {
    GraphBatch batch = make_batch({&graph});
    return predict(model, batch)[0];
}

double loss_and_gradients(const Model& model, const GraphBatch& batch, ParamStore& grads) {
    if (batch.targets_log.size() == 0)
        throw std::invalid_argument("batch has no targets");
    Tape tape;
    std::vector<std::pair<std::string, Tape::VarId>> pvars;
    Tape::VarId pred = model_forward(tape, model, batch, &pvars);
    Tape::VarId loss = tape.mean_abs_error(pred, batch.targets_log);
    tape.backward(loss);
    for (const auto& [name, id] : pvars) {
        const Matrix& g = tape.grad(id);
        if (g.size() != 0) grads.at(name) += g;
    }
    return tape.value(loss)(0, 0);
}

ForwardTrace forward_trace(const Model& model, const GraphBatch& batch) {
    Tape tape;
    TapeParams tp = register_params(tape, model, nullptr);
    ForwardTrace trace;
    if (model.kind == ModelKind::Gnn)
        gnn_forward(tape, model, batch, tp, &trace);
    else
        deepsets_forward(tape, model, batch, tp, &trace);
    return trace;
}

namespace {
constexpr int kCheckpointVersion = 1;
}

std::string serialize_model(const Model& model) {
    nlohmann::ordered_json j;
    j["schema_version"] = kCheckpointVersion;
    j["kind"] = model.kind == ModelKind::Gnn ? "gnn" : "deepsets";
    j["node_in"] = model.node_in;
    j["feature_schema_fingerprint"] = model.schema_fingerprint;
    j["hyperparams"] = {
        {"propagation_layers", model.hp.propagation_layers},
        {"node_hidden", model.hp.node_hidden},
        {"global_hidden", model.hp.global_hidden},
        {"attention_heads", model.hp.attention_heads},
        {"attention_hidden", model.hp.attention_hidden},
        {"attention_slope", model.hp.attention_slope},
        {"head_outputs", model.hp.head_outputs},
        {"ds_hidden", model.hp.ds_hidden},
        {"ds_layers", model.hp.ds_layers},
    };
    j["tensors"] = nlohmann::ordered_json::array();
    for (const auto& [name, m] : model.params.tensors()) {
        nlohmann::ordered_json jt;
        jt["name"] = name;
        jt["rows"] = m.rows();
        jt["cols"] = m.cols();
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(m.size()));
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
        jt["data"] = std::move(data);
        j["tensors"].push_back(std::move(jt));
    }
    return j.dump() + "\n";
}

Model deserialize_model(const std::string& document) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != kCheckpointVersion)
        throw SchemaError("unsupported checkpoint version");
    const std::string kind = j.at("kind").get<std::string>();
    Hyperparams hp;
    const auto& jh = j.at("hyperparams");
    hp.propagation_layers = jh.at("propagation_layers").get<int>();
    hp.node_hidden = jh.at("node_hidden").get<int>();
    hp.global_hidden = jh.at("global_hidden").get<int>();
    hp.attention_heads = jh.at("attention_heads").get<int>();
    hp.attention_hidden = jh.at("attention_hidden").get<int>();
    hp.attention_slope = jh.at("attention_slope").get<double>();
    hp.head_outputs = jh.at("head_outputs").get<int>();
    hp.ds_hidden = jh.at("ds_hidden").get<int>();
    hp.ds_layers = jh.at("ds_layers").get<int>();
    const int node_in = j.at("node_in").get<int>();
    const std::uint64_t fp = j.at("feature_schema_fingerprint").get<std::uint64_t>();
    Model m = kind == "gnn" ? Model::init_gnn(node_in, hp, fp, 0)
                            : Model::init_deepsets(node_in, hp, fp, 0);
    for (const auto& jt : j.at("tensors")) {
        const std::string name = jt.at("name").get<std::string>();
        if (!m.params.has(name)) throw SchemaError("unexpected tensor \"" + name + "\"");
        Matrix& t = m.params.at(name);
        const int rows = jt.at("rows").get<int>();
        const int cols = jt.at("cols").get<int>();
        if (rows != t.rows() || cols != t.cols())
            throw SchemaError("tensor \"" + name + "\" has mismatched shape");
        const auto data = jt.at("data").get<std::vector<double>>();
        if (static_cast<int>(data.size()) != rows * cols)
            throw SchemaError("tensor \"" + name + "\" has wrong element count");
        int idx = 0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) t(r, c) = data[idx++];
    }
    return m;
}

void save_model(const Model& model, const std::string& path) {
    write_text_file(path, serialize_model(model));
}

Model load_model(const std::string& path) { return deserialize_model(read_text_file(path)); }

}  // namespace hlsdse
