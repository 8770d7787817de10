#include <cmath>
#include <random>

#include "doctest.h"
#include "hlsdse/frontend.hpp"
#include "hlsdse/model.hpp"

using namespace hlsdse;

namespace {

// ---------------------------------------------------------------------
// Independent reference implementation: the same equations written as
// straight-line loops over std::vector, sharing nothing with the tape.
// ---------------------------------------------------------------------

using Vec = std::vector<double>;

Vec ref_mat_vec(const Matrix& w, const Vec& x) {
    Vec y(w.rows(), 0.0);
    for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) y[r] += w(r, c) * x[c];
    return y;
}

Vec ref_mlp(const ParamStore& ps, const std::string& name, const Vec& x) {
    Vec h = ref_mat_vec(ps.at(name + ".w1"), x);
    const Matrix& b1 = ps.at(name + ".b1");
    for (std::size_t i = 0; i < h.size(); ++i) {
        h[i] += b1(static_cast<int>(i), 0);
        h[i] = h[i] > 0 ? h[i] : std::expm1(h[i]);
    }
    Vec y = ref_mat_vec(ps.at(name + ".w2"), h);
    const Matrix& b2 = ps.at(name + ".b2");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b2(static_cast<int>(i), 0);
    return y;
}

Vec ref_concat(const Vec& a, const Vec& b) {
    Vec out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Vec ref_row(const Matrix& m, int r) {
    Vec out(m.cols());
    for (int c = 0; c < m.cols(); ++c) out[c] = m(r, c);
    return out;
}

std::array<double, 4> ref_gnn_forward(const Model& model, const EncodedGraph& g) {
    const int n = static_cast<int>(g.node_features.rows());
    const int m = static_cast<int>(g.edge_features.rows());
    const int heads = model.hp.attention_heads;
    const double slope = model.hp.attention_slope;
    const auto& ps = model.params;

    std::vector<Vec> v(n), e_enc(m);
    for (int i = 0; i < n; ++i) v[i] = ref_mlp(ps, "enc_v", ref_row(g.node_features, i));
    for (int e = 0; e < m; ++e) e_enc[e] = ref_mlp(ps, "enc_e", ref_row(g.edge_features, e));
    Vec u = ref_mlp(ps, "enc_u", Vec(g.global_features.data(),
                                     g.global_features.data() + g.global_features.size()));

    for (int t = 1; t <= model.hp.propagation_layers; ++t) {
        const std::string p = "prop" + std::to_string(t);
        std::vector<Vec> v_new(n);
        for (int i = 0; i < n; ++i) {
            Vec agg(model.hp.node_hidden, 0.0);
            int incoming = 0;
            for (int e = 0; e < m; ++e) {
                if (g.edge_dst[e] != i) continue;
                Vec msg = ref_mlp(ps, p + ".psi_v", ref_concat(v[g.edge_src[e]], e_enc[e]));
                for (std::size_t k = 0; k < agg.size(); ++k) agg[k] += msg[k];
                ++incoming;
            }
            if (incoming > 0)
                for (auto& x : agg) x /= incoming;
            v_new[i] = ref_mlp(ps, p + ".tau_v", ref_concat(v[i], agg));
        }
        // attention over nodes, per head, softmax with max subtraction
        std::vector<Vec> logits(n);
        for (int i = 0; i < n; ++i) {
            logits[i] = ref_mlp(ps, p + ".alpha", ref_concat(u, v_new[i]));
            for (auto& x : logits[i]) x = x >= 0 ? x : slope * x;
        }
        Vec pooled;
        for (int h = 0; h < heads; ++h) {
            double mx = logits[0][h];
            for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i][h]);
            double z = 0;
            Vec sc(n);
            for (int i = 0; i < n; ++i) {
                sc[i] = std::exp(logits[i][h] - mx);
                z += sc[i];
            }
            Vec head(model.hp.global_hidden, 0.0);
            for (int i = 0; i < n; ++i) {
                Vec pj = ref_mlp(ps, p + ".psi_u", v[i]);  // previous node state
                for (std::size_t k = 0; k < head.size(); ++k) head[k] += (sc[i] / z) * pj[k];
            }
            pooled = ref_concat(pooled, head);
        }
        u = ref_mlp(ps, p + ".tau_u", ref_concat(u, pooled));
        v = std::move(v_new);
    }

    std::vector<Vec> logits(n);
    for (int i = 0; i < n; ++i) {
        logits[i] = ref_mlp(ps, "head.alpha", ref_concat(u, v[i]));
        for (auto& x : logits[i]) x = x >= 0 ? x : slope * x;
    }
    Vec pooled;
    for (int h = 0; h < heads; ++h) {
        double mx = logits[0][h];
        for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i][h]);
        double z = 0;
        Vec sc(n);
        for (int i = 0; i < n; ++i) {
            sc[i] = std::exp(logits[i][h] - mx);
            z += sc[i];
        }
        Vec head(model.hp.global_hidden, 0.0);
        for (int i = 0; i < n; ++i) {
            Vec pj = ref_mlp(ps, "head.psi", v[i]);
            for (std::size_t k = 0; k < head.size(); ++k) head[k] += (sc[i] / z) * pj[k];
        }
        pooled = ref_concat(pooled, head);
    }
    Vec out = ref_mlp(ps, "head.out", ref_concat(u, pooled));
    return {out[0], out[1], out[2], out[3]};
}

std::array<double, 4> ref_deepsets_forward(const Model& model, const EncodedGraph& g) {
    const int n = static_cast<int>(g.node_features.rows());
    const auto& ps = model.params;
    Vec agg(model.hp.ds_hidden, 0.0);
    for (int i = 0; i < n; ++i) {
        Vec h = ref_row(g.node_features, i);
        for (int l = 1; l <= model.hp.ds_layers; ++l) {
            const std::string name = "node" + std::to_string(l);
            h = ref_mat_vec(ps.at(name + ".w"), h);
            const Matrix& b = ps.at(name + ".b");
            for (std::size_t k = 0; k < h.size(); ++k)
                h[k] = std::max(0.0, h[k] + b(static_cast<int>(k), 0));
        }
        for (std::size_t k = 0; k < agg.size(); ++k) agg[k] += h[k];
    }
    Vec gin = ref_concat(agg, Vec(g.global_features.data(),
                                  g.global_features.data() + g.global_features.size()));
    Vec h = ref_mat_vec(ps.at("global1.w"), gin);
    const Matrix& b1 = ps.at("global1.b");
    for (std::size_t k = 0; k < h.size(); ++k)
        h[k] = std::max(0.0, h[k] + b1(static_cast<int>(k), 0));
    Vec out = ref_mat_vec(ps.at("global2.w"), h);
    const Matrix& b2 = ps.at("global2.b");
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += b2(static_cast<int>(k), 0);
    return {out[0], out[1], out[2], out[3]};
}

// ---------------------------------------------------------------------
// Random test graphs (feature-level, independent of the frontend)
// ---------------------------------------------------------------------

Hyperparams tiny_hp() {
    Hyperparams hp;
    hp.propagation_layers = 2;
    hp.node_hidden = 5;
    hp.global_hidden = 7;
    hp.attention_heads = 2;
    hp.attention_hidden = 6;
    hp.ds_hidden = 8;
    hp.ds_layers = 3;
    return hp;
}

EncodedGraph random_graph(std::mt19937_64& rng, int node_in, int min_nodes = 2,
                          int max_nodes = 8) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto randint = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    EncodedGraph g;
    const int n = randint(min_nodes, max_nodes);
    const int m = randint(0, 2 * n);
    g.node_features = Matrix::Zero(n, node_in);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < node_in; ++c) g.node_features(i, c) = unif(rng);
    g.edge_features = Matrix::Zero(m, 3);
    for (int e = 0; e < m; ++e) {
        g.edge_features(e, randint(0, 2)) = 1.0;
        g.edge_src.push_back(randint(0, n - 1));
        g.edge_dst.push_back(randint(0, n - 1));
    }
    g.global_features = Eigen::VectorXd::Zero(12);
    for (int k = 0; k < 12; ++k) g.global_features[k] = unif(rng);
    return g;
}

EncodedGraph permute_graph(const EncodedGraph& g, const std::vector<int>& perm) {
    // perm[i] = new row of old node i
    EncodedGraph out = g;
    for (int i = 0; i < g.node_features.rows(); ++i)
        out.node_features.row(perm[i]) = g.node_features.row(i);
    for (std::size_t e = 0; e < g.edge_src.size(); ++e) {
        out.edge_src[e] = perm[g.edge_src[e]];
        out.edge_dst[e] = perm[g.edge_dst[e]];
    }
    return out;
}

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_CASE("encoder with zero weights maps everything to zero") {
    Model m = Model::init_gnn(9, tiny_hp(), 0, 1);
    for (auto& [name, t] : m.params.tensors()) t.setZero();
    std::mt19937_64 rng(5);
    EncodedGraph g = random_graph(rng, 9, 3, 3);
    GraphBatch b = make_batch({&g});
    ForwardTrace tr = forward_trace(m, b);
    CHECK(tr.v0.cwiseAbs().maxCoeff() == 0.0);
    if (tr.e_enc.size() > 0) CHECK(tr.e_enc.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.u0.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shapes: hidden widths and output arity") {
    Model m = Model::init_gnn(9, tiny_hp(), 0, 2);
    std::mt19937_64 rng(6);
    EncodedGraph g = random_graph(rng, 9);
    GraphBatch b = make_batch({&g});
    ForwardTrace tr = forward_trace(m, b);
    CHECK(tr.v0.cols() == tiny_hp().node_hidden);
    CHECK(tr.u0.cols() == tiny_hp().global_hidden);
    CHECK(tr.pred.rows() == 1);
    CHECK(tr.pred.cols() == 4);
}

TEST_CASE("single-node graph: softmax score is exactly 1") {
    Model m = Model::init_gnn(9, tiny_hp(), 0, 3);
    std::mt19937_64 rng(7);
    EncodedGraph g = random_graph(rng, 9, 1, 1);
    GraphBatch b = make_batch({&g});
    ForwardTrace tr = forward_trace(m, b);
    for (const auto& s : tr.scores)
        for (int h = 0; h < s.cols(); ++h) CHECK(s(0, h) == 1.0);
    CHECK(tr.head_scores(0, 0) == 1.0);
}

TEST_CASE("nodes without incoming edges aggregate the zero vector") {
    Model m = Model::init_gnn(9, tiny_hp(), 0, 4);
    std::mt19937_64 rng(8);
    EncodedGraph g = random_graph(rng, 9, 2, 2);
    g.edge_features = Matrix::Zero(1, 3);
    g.edge_features(0, 0) = 1.0;
    g.edge_src = {0};
    g.edge_dst = {1};  // node 0 has no incoming edges
    GraphBatch b = make_batch({&g});
    ForwardTrace tr = forward_trace(m, b);

    // reference: v1[0] = tau_v(v0[0] || 0)
    Vec v00 = ref_mlp(m.params, "enc_v", ref_row(g.node_features, 0));
    Vec expect = ref_mlp(m.params, "prop1.tau_v",
                         ref_concat(v00, Vec(tiny_hp().node_hidden, 0.0)));
    for (int k = 0; k < tr.v[0].cols(); ++k)
        CHECK(rel_diff(tr.v[0](0, k), expect[k]) < 1e-12);
}

TEST_CASE("forward agrees with the straight-line reference implementation") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        Model m = Model::init_gnn(9, tiny_hp(), 0, 100 + rep);
        EncodedGraph g = random_graph(rng, 9);
        Prediction got = predict_one(m, g);
        std::array<double, 4> want = ref_gnn_forward(m, g);
        for (int k = 0; k < 4; ++k) CHECK(rel_diff(got.log[k], want[k]) < 1e-11);
    }
}

TEST_CASE("attention scores sum to one per head within 1e-12") {
    std::mt19937_64 rng(12);
    Model m = Model::init_gnn(9, tiny_hp(), 0, 21);
    for (int rep = 0; rep < 10; ++rep) {
        EncodedGraph g = random_graph(rng, 9);
        GraphBatch b = make_batch({&g});
        ForwardTrace tr = forward_trace(m, b);
        for (const auto& s : tr.scores)
            for (int h = 0; h < s.cols(); ++h)
                CHECK(std::abs(s.col(h).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("permutation invariance of the forward pass") {
    std::mt19937_64 rng(13);
    Model m = Model::init_gnn(9, tiny_hp(), 0, 31);
    for (int rep = 0; rep < 100; ++rep) {
        EncodedGraph g = random_graph(rng, 9);
        const int n = static_cast<int>(g.node_features.rows());
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        EncodedGraph pg = permute_graph(g, perm);
        Prediction a = predict_one(m, g);
        Prediction b = predict_one(m, pg);
        for (int k = 0; k < 4; ++k) CHECK(rel_diff(a.log[k], b.log[k]) < 1e-9);
    }
}

TEST_CASE("messages flow along edge direction") {
    std::mt19937_64 rng(14);
    Model m = Model::init_gnn(9, tiny_hp(), 0, 41);
    EncodedGraph g = random_graph(rng, 9, 4, 4);
    g.edge_features = Matrix::Zero(1, 3);
    g.edge_features(0, 1) = 1.0;  // data edge
    g.edge_src = {0};
    g.edge_dst = {3};
    Prediction a = predict_one(m, g);
    std::swap(g.edge_src[0], g.edge_dst[0]);
    Prediction b = predict_one(m, g);
    double diff = 0;
    for (int k = 0; k < 4; ++k) diff = std::max(diff, std::abs(a.log[k] - b.log[k]));
    CHECK(diff > 1e-9);
}

TEST_CASE("ablating an absent edge kind leaves the output bit-identical") {
    HcdfgGraph g = extract_graph("void f(){ int x; x = 1 + 2; }");  // control edges only
    FeatureSchema schema;
    ConfigurationSpace space;
    space.design_id = "f";
    Directive d;
    d.target = "?";
    // no directives apply; use a single-value dummy unroll on a label-less
    // space: encode requires resolvable targets, so use an empty-directive
    // space via a loop design instead.
    HcdfgGraph g2 = extract_graph(
        "void f(int a[4]){ L0: for(int i=0;i<4;i++){ a[i] = a[i] + 1; } }");
    ConfigurationSpace sp;
    sp.design_id = "f";
    Directive u;
    u.target = "L0";
    u.dtype = DirectiveType::Unroll;
    u.raw_values = {"1", "2"};
    u.values = {1, 2};
    sp.directives.push_back(u);
    compute_normalization(sp);

    HcdfgGraph no_data = ablate_edges(g2, {EdgeKind::Data});
    HcdfgGraph same = ablate_edges(no_data, {EdgeKind::Data});  // absent now

    Model m = Model::init_gnn(schema.node_width(), tiny_hp(), schema.fingerprint(), 51);
    Prediction a = predict_one(m, encode_features(no_data, sp, {1}, schema));
    Prediction b = predict_one(m, encode_features(same, sp, {1}, schema));
    for (int k = 0; k < 4; ++k) CHECK(a.log[k] == b.log[k]);
    (void)g;
}

TEST_CASE("loss: exact zeros and simple arithmetic") {
    Prediction p;
    std::array<double, 4> target{10, 20, 30, 0};
    for (int k = 0; k < 4; ++k) p.log[k] = std::log1p(target[k]);
    CHECK(prediction_loss(p, target) == 0.0);

    p.log[2] += 1.0;
    CHECK(prediction_loss(p, target) == doctest::Approx(0.25).epsilon(1e-15));

    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> unif(0.0, 100.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::array<double, 4> t{unif(rng), unif(rng), unif(rng), unif(rng)};
        Prediction q;
        for (int k = 0; k < 4; ++k) q.log[k] = unif(rng) / 10.0;
        double expect = 0;
        for (int k = 0; k < 4; ++k) expect += std::abs(q.log[k] - std::log1p(t[k]));
        expect /= 4.0;
        CHECK(prediction_loss(q, t) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK_THROWS_AS(prediction_loss(p, {1, -2, 3, 4}), std::invalid_argument);
}

TEST_CASE("gradients match central finite differences") {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> unif(0.0, 50.0);
    const double h = 1e-5;
    for (int rep = 0; rep < 3; ++rep) {
        Model m = rep % 2 == 0 ? Model::init_gnn(6, tiny_hp(), 0, 200 + rep)
                               : Model::init_deepsets(6, tiny_hp(), 0, 200 + rep);
        std::vector<EncodedGraph> graphs;
        std::vector<const EncodedGraph*> ptrs;
        std::vector<std::array<double, 4>> targets;
        for (int b = 0; b < 2; ++b) {
            graphs.push_back(random_graph(rng, 6, 2, 5));
            targets.push_back({unif(rng), unif(rng), unif(rng), unif(rng)});
        }
        for (const auto& g : graphs) ptrs.push_back(&g);
        GraphBatch batch = make_batch(ptrs, &targets);

        ParamStore grads = m.params.zeros_like();
        loss_and_gradients(m, batch, grads);

        auto loss_at = [&](Model& model) {
            Tape tape;
            Tape::VarId pred = model_forward(tape, model, batch);
            Tape::VarId loss = tape.mean_abs_error(pred, batch.targets_log);
            return tape.value(loss)(0, 0);
        };

        double max_rel = 0;
        for (auto& [name, t] : m.params.tensors()) {
            const Matrix& g = grads.at(name);
            for (int r = 0; r < t.rows(); ++r)
                for (int c = 0; c < t.cols(); ++c) {
                    const double orig = t(r, c);
                    t(r, c) = orig + h;
                    const double up = loss_at(m);
                    t(r, c) = orig - h;
                    const double down = loss_at(m);
                    t(r, c) = orig;
                    const double fd = (up - down) / (2 * h);
                    const double rel = std::abs(fd - g(r, c)) /
                                       std::max({1e-6, std::abs(fd), std::abs(g(r, c))});
                    max_rel = std::max(max_rel, rel);
                }
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("zero loss gives zero gradients") {
    std::mt19937_64 rng(17);
    Model m = Model::init_gnn(6, tiny_hp(), 0, 61);
    EncodedGraph g = random_graph(rng, 6);
    Prediction p = predict_one(m, g);
    std::vector<std::array<double, 4>> targets{
        {std::expm1(p.log[0]), std::expm1(p.log[1]), std::expm1(p.log[2]),
         std::expm1(p.log[3])}};
    // guard: predictions must be valid log targets for this to be exact
    for (int k = 0; k < 4; ++k)
        if (targets[0][k] < 0) targets[0][k] = 0;
    GraphBatch batch = make_batch({&g}, &targets);
    ParamStore grads = m.params.zeros_like();
    loss_and_gradients(m, batch, grads);
    for (auto& [name, t] : grads.tensors()) {
        if (std::abs(batch.targets_log(0, 0) - p.log[0]) > 1e-15) break;
        CHECK(t.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("deepsets: permutation invariance and reference agreement") {
    std::mt19937_64 rng(18);
    Model m = Model::init_deepsets(9, tiny_hp(), 0, 71);
    for (int rep = 0; rep < 20; ++rep) {
        EncodedGraph g = random_graph(rng, 9);
        const int n = static_cast<int>(g.node_features.rows());
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        Prediction a = predict_one(m, g);
        Prediction b = predict_one(m, permute_graph(g, perm));
        for (int k = 0; k < 4; ++k) CHECK(rel_diff(a.log[k], b.log[k]) < 1e-9);

        std::array<double, 4> want = ref_deepsets_forward(m, g);
        for (int k = 0; k < 4; ++k) CHECK(rel_diff(a.log[k], want[k]) < 1e-11);
    }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    Model m = Model::init_gnn(9, tiny_hp(), 12345, 81);
    std::string doc = serialize_model(m);
    Model back = deserialize_model(doc);
    CHECK(back.kind == m.kind);
    CHECK(back.schema_fingerprint == m.schema_fingerprint);
    CHECK(back.hp == m.hp);
    REQUIRE(back.params.count() == m.params.count());
    for (const auto& [name, t] : m.params.tensors()) {
        const Matrix& bt = back.params.at(name);
        CHECK(t == bt);
    }
    std::mt19937_64 rng(19);
    EncodedGraph g = random_graph(rng, 9);
    Prediction a = predict_one(m, g);
    Prediction b = predict_one(back, g);
    for (int k = 0; k < 4; ++k) CHECK(a.log[k] == b.log[k]);

    CHECK_THROWS_AS(deserialize_model("{\"schema_version\": 99}"), SchemaError);
}
