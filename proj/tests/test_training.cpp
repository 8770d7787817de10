#include <cmath>
#include <random>

#include "doctest.h"
#include "hlsdse/training.hpp"

using namespace hlsdse;

namespace {

Hyperparams tiny_hp() {
    Hyperparams hp;
    hp.propagation_layers = 2;
    hp.node_hidden = 8;
    hp.global_hidden = 10;
    hp.attention_heads = 2;
    hp.attention_hidden = 8;
    hp.ds_hidden = 16;
    hp.ds_layers = 2;
    return hp;
}

// A small encoded set drawn from a real synthetic design.
TrainingSet small_set(int count, std::uint64_t seed = 9) {
    Dataset ds;
    ds.designs.push_back(make_builtin_design("vec_add", seed));
    std::vector<ExampleRef> refs;
    const int stride = static_cast<int>(ds.designs[0].records.size()) / count;
    for (int i = 0; i < count; ++i) refs.push_back({0, i * stride});
    return encode_examples(ds, refs);
}

}  // namespace

TEST_CASE("fine-tuning sample budget") {
    CHECK(FinetuneConfig::sample_budget(4704) == 128);  // 5% would be 236
    CHECK(FinetuneConfig::sample_budget(392) == 20);    // ceil(19.6)
    CHECK(FinetuneConfig::sample_budget(2560) == 128);  // exactly 5% = 128
    CHECK(FinetuneConfig::sample_budget(20) == 1);
}

TEST_CASE("cosine schedule endpoints and monotone decay") {
    TrainConfig cfg;
    cfg.epochs = 800;
    CHECK(lr_at_epoch(cfg, 0) == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(lr_at_epoch(cfg, 799) == doctest::Approx(0.0001).epsilon(1e-12));
    for (int e = 1; e < 800; ++e) CHECK(lr_at_epoch(cfg, e) <= lr_at_epoch(cfg, e - 1));

    cfg.epochs = 1;
    CHECK(lr_at_epoch(cfg, 0) == 0.001);
}

TEST_CASE("split proportions, determinism, and disjointness") {
    Dataset ds;
    ds.designs.push_back(make_builtin_design("dot", 1));  // 384 records
    auto splits = split(ds, 7);
    const auto& s = splits.at("dot");
    // 384: floor(38.4)=38 val, floor(76.8)=76 test, 270 train
    CHECK(s.val.size() == 38);
    CHECK(s.test.size() == 76);
    CHECK(s.train.size() == 270);

    std::set<int> all;
    for (int i : s.train) all.insert(i);
    for (int i : s.val) all.insert(i);
    for (int i : s.test) all.insert(i);
    CHECK(all.size() == 384);

    auto splits2 = split(ds, 7);
    CHECK(splits2.at("dot").train == s.train);
    CHECK(splits2.at("dot").val == s.val);
    auto splits3 = split(ds, 8);
    CHECK(splits3.at("dot").train != s.train);

    // documented rounding on sizes that do not divide evenly
    Design& d = ds.designs[0];
    d.records.resize(103);
    auto s103 = split(ds, 7).at("dot");
    CHECK(s103.val.size() == 10);
    CHECK(s103.test.size() == 20);
    CHECK(s103.train.size() == 73);

    d.records.resize(100);
    auto s100 = split(ds, 7).at("dot");
    CHECK(s100.val.size() == 10);
    CHECK(s100.test.size() == 20);
    CHECK(s100.train.size() == 70);

    d.records.resize(9);
    CHECK_THROWS_AS(split(ds, 7), std::invalid_argument);
}

TEST_CASE("gradient clipping bounds the global norm") {
    Model m = Model::init_gnn(26, tiny_hp(), 0, 3);
    ParamStore grads = m.params.zeros_like();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (auto& [name, g] : grads.tensors())
        for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) g(r, c) = unif(rng);
    ParamStore before = grads;
    const double pre = clip_gradients(grads, 3.0);
    double post = 0;
    for (const auto& [name, g] : grads.tensors()) post += g.squaredNorm();
    post = std::sqrt(post);
    CHECK(pre > 3.0);
    CHECK(post <= 3.0 + 1e-12);
    // direction preserved
    const double scale = post / pre;
    for (const auto& [name, g] : grads.tensors())
        CHECK((g - scale * before.at(name)).cwiseAbs().maxCoeff() < 1e-12);

    // below the threshold nothing changes
    ParamStore small = before;
    for (auto& [name, g] : small.tensors()) g *= 1e-6;
    ParamStore small_copy = small;
    clip_gradients(small, 3.0);
    for (const auto& [name, g] : small.tensors())
        CHECK(g == small_copy.at(name));
}

TEST_CASE("training memorizes a single point") {
    TrainingSet one = small_set(1);
    Model m = Model::init_gnn(26, tiny_hp(), FeatureSchema().fingerprint(), 5);
    TrainConfig cfg;
    cfg.epochs = 150;
    cfg.batch_size = 1;
    cfg.lr = 0.01;
    cfg.lr_min = 0.001;
    cfg.seed = 5;
    TrainResult r = train(m, one, one, cfg);
    REQUIRE(r.log.size() == 150);
    CHECK(r.log.back().train_loss < 0.05 * r.log.front().train_loss);
    // monotone trend over 50-epoch windows
    for (int e = 0; e + 50 < 150; e += 10)
        CHECK(r.log[e + 50].train_loss < r.log[e].train_loss);
}

TEST_CASE("best-epoch selection returns the validation minimum") {
    TrainingSet tr = small_set(24, 10);
    TrainingSet val = small_set(8, 11);
    Model m = Model::init_gnn(26, tiny_hp(), FeatureSchema().fingerprint(), 6);
    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.batch_size = 8;
    cfg.seed = 6;
    TrainResult r = train(m, tr, val, cfg);
    double min_val = r.log[0].val_mae;
    for (const auto& e : r.log) min_val = std::min(min_val, e.val_mae);
    CHECK(r.best_val_mae == min_val);
    CHECK(log_space_mae(r.best, val) == doctest::Approx(min_val).epsilon(1e-12));
}

TEST_CASE("identical seeds give bitwise-identical checkpoints") {
    TrainingSet tr = small_set(16, 12);
    TrainingSet val = small_set(4, 13);
    Model m = Model::init_gnn(26, tiny_hp(), FeatureSchema().fingerprint(), 7);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    cfg.seed = 42;
    TrainResult a = train(m, tr, val, cfg);
    TrainResult b = train(m, tr, val, cfg);
    CHECK(serialize_model(a.best) == serialize_model(b.best));
    CHECK(metrics_log_csv(a.log) == metrics_log_csv(b.log));
}

TEST_CASE("finetune runs the configured number of updates deterministically") {
    TrainingSet target = small_set(10, 14);
    Model m = Model::init_gnn(26, tiny_hp(), FeatureSchema().fingerprint(), 8);
    FinetuneConfig cfg;
    cfg.updates = 7;
    cfg.batch_size = 4;
    cfg.seed = 3;
    Model a = finetune(m, target, cfg);
    Model b = finetune(m, target, cfg);
    CHECK(serialize_model(a) == serialize_model(b));
    // parameters moved
    bool changed = false;
    for (const auto& [name, t] : a.params.tensors())
        changed = changed || (t - m.params.at(name)).cwiseAbs().maxCoeff() > 0;
    CHECK(changed);
    CHECK_THROWS_AS(finetune(m, TrainingSet{}, cfg), std::invalid_argument);
}

TEST_CASE("evaluate: MAPE/MAE semantics") {
    TrainingSet set = small_set(12, 15);
    Model m = Model::init_gnn(26, tiny_hp(), FeatureSchema().fingerprint(), 9);

    // independent recomputation
    EvalMetrics got = evaluate(m, set);
    std::array<double, 4> ape{};
    std::array<long long, 4> cnt{};
    std::array<double, 4> ae{};
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto pred = predict_one(m, set.graphs[i]).delogged();
        for (int k = 0; k < 4; ++k) {
            ae[k] += std::abs(pred[k] - set.targets[i][k]);
            if (set.targets[i][k] != 0) {
                ape[k] += std::abs(pred[k] - set.targets[i][k]) / set.targets[i][k];
                cnt[k] += 1;
            }
        }
    }
    for (int k = 0; k < 4; ++k) {
        CHECK(got.mae[k] == doctest::Approx(ae[k] / set.size()).epsilon(1e-9));
        const double want = cnt[k] ? 100.0 * ape[k] / cnt[k] : 0.0;
        CHECK(got.mape[k] == doctest::Approx(want).epsilon(1e-9));
    }

    // vec_add has no multiplications: DSP is all-zero and reported as 0.0%
    for (std::size_t i = 0; i < set.size(); ++i) CHECK(set.targets[i][3] == 0.0);
    CHECK(got.mape[3] == 0.0);

    // perfect predictions: zero errors
    TrainingSet perfect = set;
    for (std::size_t i = 0; i < perfect.size(); ++i)
        perfect.targets[i] = predict_one(m, perfect.graphs[i]).delogged();
    EvalMetrics zero = evaluate(m, perfect);
    for (int k = 0; k < 4; ++k) {
        CHECK(zero.mae[k] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(zero.mape[k] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("train config files round-trip") {
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.seed = 17;
    TrainConfig back = deserialize_train_config(serialize_train_config(cfg));
    CHECK(back.epochs == 60);
    CHECK(back.seed == 17);
    CHECK(back.lr == cfg.lr);
    CHECK_THROWS_AS(deserialize_train_config("{\"epochs\": -1}"), SchemaError);
}
