#include "hlsdse/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

namespace hlsdse {

long long FinetuneConfig::sample_budget(long long space_size) {
    const long long five_percent = (space_size + 19) / 20;  // ceil(0.05 * n)
    return std::min<long long>(128, five_percent);
}

std::string serialize_train_config(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["lr"] = cfg.lr;
    j["lr_min"] = cfg.lr_min;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["eps"] = cfg.eps;
    j["grad_clip_norm"] = cfg.grad_clip_norm;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

TrainConfig deserialize_train_config(const std::string& document) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("train config is not valid JSON: ") + e.what());
    }
    TrainConfig cfg;
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
    if (j.contains("lr_min")) cfg.lr_min = j["lr_min"].get<double>();
    if (j.contains("beta1")) cfg.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) cfg.beta2 = j["beta2"].get<double>();
    if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
    if (j.contains("grad_clip_norm")) cfg.grad_clip_norm = j["grad_clip_norm"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.lr <= 0 || cfg.grad_clip_norm <= 0)
        throw SchemaError("train config values must be positive");
    return cfg;
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
    if (cfg.epochs <= 1) return cfg.lr;
    const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return cfg.lr_min + 0.5 * (cfg.lr - cfg.lr_min) * (1.0 + std::cos(M_PI * t));
}

std::map<std::string, SplitIndices> split(const Dataset& dataset, std::uint64_t seed) {
    std::map<std::string, SplitIndices> out;
    for (const auto& design : dataset.designs) {
        const int n = static_cast<int>(design.records.size());
        if (n < 10)
            throw std::invalid_argument("design \"" + design.id() +
                                        "\" has fewer than 10 records");
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(seed ^ fnv1a(design.id()));
        std::shuffle(idx.begin(), idx.end(), rng);
        const int n_val = n / 10;
        const int n_test = n / 5;
        SplitIndices s;
        s.val.assign(idx.begin(), idx.begin() + n_val);
        s.test.assign(idx.begin() + n_val, idx.begin() + n_val + n_test);
        s.train.assign(idx.begin() + n_val + n_test, idx.end());
        out[design.id()] = std::move(s);
    }
    return out;
}

TrainingSet encode_examples(const Dataset& dataset, const std::vector<ExampleRef>& refs) {
    TrainingSet set;
    set.graphs.reserve(refs.size());
    for (const auto& ref : refs) {
        const Design& d = dataset.designs[ref.design];
        const SynthesisRecord& r = d.records[ref.record];
        set.graphs.push_back(encode_features(d.graph, d.space, r.config, dataset.schema));
        set.targets.push_back(r.targets());
        set.design_ids.push_back(d.id());
    }
    return set;
}

TrainingSet encode_split(const Dataset& dataset,
                         const std::map<std::string, SplitIndices>& splits, Section section) {
    std::vector<ExampleRef> refs;
    for (int d = 0; d < static_cast<int>(dataset.designs.size()); ++d) {
        const auto it = splits.find(dataset.designs[d].id());
        if (it == splits.end()) continue;
        const std::vector<int>* idx = nullptr;
        switch (section) {
            case Section::Train: idx = &it->second.train; break;
            case Section::Val: idx = &it->second.val; break;
            case Section::Test: idx = &it->second.test; break;
        }
        for (int r : *idx) refs.push_back({d, r});
    }
    return encode_examples(dataset, refs);
}

namespace {

GraphBatch batch_of(const TrainingSet& set, const std::vector<int>& idx) {
    std::vector<const EncodedGraph*> ptrs;
    std::vector<std::array<double, 4>> targets;
    ptrs.reserve(idx.size());
    for (int i : idx) {
        ptrs.push_back(&set.graphs[i]);
        targets.push_back(set.targets[i]);
    }
    return make_batch(ptrs, &targets);
}

struct Adam {
    ParamStore m, v;
    long long t = 0;
    double beta1, beta2, eps;

    Adam(const ParamStore& like, double b1, double b2, double e)
        : m(like.zeros_like()), v(like.zeros_like()), beta1(b1), beta2(b2), eps(e) {}

    void step(ParamStore& params, const ParamStore& grads, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.tensors().size(); ++i) {
            Matrix& p = params.tensors()[i].second;
            const Matrix& g = grads.tensors()[i].second;
            Matrix& mi = m.tensors()[i].second;
            Matrix& vi = v.tensors()[i].second;
            mi = beta1 * mi + (1.0 - beta1) * g;
            vi = beta2 * vi + (1.0 - beta2) * g.cwiseProduct(g);
            const Matrix mhat = mi / bc1;
            const Matrix vhat = vi / bc2;
            p.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
        }
    }
};

// Loss and gradients of the batch mean over `idx`, split into fixed chunks
// across compute threads; partial gradients are combined in chunk order.
double dispatch_loss_and_grads(const Model& model, const TrainingSet& set,
                               const std::vector<int>& idx, ParamStore& grads) {
    const int jobs = compute_threads();
    if (jobs <= 1 || idx.size() < 4) {
        GraphBatch batch = batch_of(set, idx);
        return loss_and_gradients(model, batch, grads);
    }
    const std::size_t per = (idx.size() + jobs - 1) / jobs;
    const int n_chunks = static_cast<int>((idx.size() + per - 1) / per);
    std::vector<ParamStore> partial;
    partial.reserve(n_chunks);
    for (int c = 0; c < n_chunks; ++c) partial.push_back(model.params.zeros_like());
    std::vector<double> losses(n_chunks, 0.0);
    std::vector<double> counts(n_chunks, 0.0);
    parallel_chunks(idx.size(), per, jobs, [&](int c, std::size_t lo, std::size_t hi) {
        std::vector<int> sub(idx.begin() + lo, idx.begin() + hi);
        GraphBatch b = batch_of(set, sub);
        losses[c] = loss_and_gradients(model, b, partial[c]);
        counts[c] = static_cast<double>(hi - lo);
    });
    const double n = static_cast<double>(idx.size());
    double loss = 0;
    for (int c = 0; c < n_chunks; ++c) {
        const double w = counts[c] / n;
        loss += losses[c] * w;
        for (std::size_t t = 0; t < grads.tensors().size(); ++t)
            grads.tensors()[t].second += w * partial[c].tensors()[t].second;
    }
    return loss;
}

}  // namespace

double clip_gradients(ParamStore& grads, double max_norm) {
    double sq = 0;
    for (const auto& [name, g] : grads.tensors()) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0) {
        const double scale = max_norm / norm;
        for (auto& [name, g] : grads.tensors()) g *= scale;
    }
    return norm;
}

double log_space_mae(const Model& model, const TrainingSet& set) {
    if (set.size() == 0) return 0.0;
    const std::size_t chunk = 256;
    const std::size_t n_chunks = (set.size() + chunk - 1) / chunk;
    std::vector<double> totals(n_chunks, 0.0);
    parallel_chunks(set.size(), chunk, compute_threads(),
                    [&](int c, std::size_t lo, std::size_t hi) {
                        std::vector<int> idx(hi - lo);
                        std::iota(idx.begin(), idx.end(), static_cast<int>(lo));
                        GraphBatch b = batch_of(set, idx);
                        Tape tape;
                        Tape::VarId pred = model_forward(tape, model, b);
                        const Matrix& P = tape.value(pred);
                        totals[c] = (P - b.targets_log).array().abs().sum() / 4.0;
                    });
    double total = 0;
    for (double t : totals) total += t;
    return total / static_cast<double>(set.size());
}

TrainResult train(const Model& model, const TrainingSet& train_set,
                  const TrainingSet& val_set, const TrainConfig& cfg) {
    if (train_set.size() == 0) throw std::invalid_argument("empty training set");
    TrainResult result;
    result.best = model;
    Model current = model;
    Adam adam(current.params, cfg.beta1, cfg.beta2, cfg.eps);
    std::mt19937_64 rng(cfg.seed);
    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    result.best_val_mae = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at_epoch(cfg, epoch);
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0;
        int batches = 0;
        for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
            const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
            std::vector<int> idx(order.begin() + lo, order.begin() + hi);
            ParamStore grads = current.params.zeros_like();
            const double loss = dispatch_loss_and_grads(current, train_set, idx, grads);
            if (!std::isfinite(loss))
                throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batches) +
                                         " (lr=" + format_double(lr) + ")");
            clip_gradients(grads, cfg.grad_clip_norm);
            adam.step(current.params, grads, lr);
            loss_sum += loss;
            ++batches;
        }
        const double val_mae = log_space_mae(current, val_set);
        if (!std::isfinite(val_mae))
            throw std::runtime_error("non-finite validation error at epoch " +
                                     std::to_string(epoch));
        result.log.push_back({epoch, lr, loss_sum / std::max(1, batches), val_mae});
        if (val_mae < result.best_val_mae) {
            result.best_val_mae = val_mae;
            result.best_epoch = epoch;
            result.best = current;
        }
    }
    if (val_set.size() == 0) result.best = current;  // nothing to select on
    return result;
}

Model finetune(const Model& pretrained, const TrainingSet& target_records,
               const FinetuneConfig& cfg) {
    if (target_records.size() == 0) throw std::invalid_argument("empty fine-tuning set");
    Model current = pretrained;
    Adam adam(current.params, cfg.beta1, cfg.beta2, cfg.eps);
    std::mt19937_64 rng(cfg.seed);
    const int n = static_cast<int>(target_records.size());
    const int batch_size = std::min(cfg.batch_size, n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;
    for (int update = 0; update < cfg.updates; ++update) {
        if (cursor + batch_size > order.size()) {
            std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
        }
        std::vector<int> idx(order.begin() + cursor, order.begin() + cursor + batch_size);
        cursor += batch_size;
        ParamStore grads = current.params.zeros_like();
        const double loss = dispatch_loss_and_grads(current, target_records, idx, grads);
        if (!std::isfinite(loss))
            throw std::runtime_error("non-finite loss at fine-tune update " +
                                     std::to_string(update));
        clip_gradients(grads, cfg.grad_clip_norm);
        adam.step(current.params, grads, cfg.lr);
    }
    return current;
}

EvalMetrics evaluate(const Model& model, const TrainingSet& records) {
    if (records.size() == 0) throw std::invalid_argument("empty evaluation set");
    EvalMetrics out;
    std::array<double, 4> ape_sum{};
    std::array<long long, 4> ape_count{};
    std::array<double, 4> ae_sum{};
    const std::size_t chunk = 256;
    const std::size_t n_chunks = (records.size() + chunk - 1) / chunk;
    std::vector<std::array<double, 4>> c_ape(n_chunks), c_ae(n_chunks);
    std::vector<std::array<long long, 4>> c_cnt(n_chunks);
    parallel_chunks(records.size(), chunk, compute_threads(),
                    [&](int c, std::size_t lo, std::size_t hi) {
                        std::vector<int> idx(hi - lo);
                        std::iota(idx.begin(), idx.end(), static_cast<int>(lo));
                        GraphBatch b = batch_of(records, idx);
                        std::vector<Prediction> preds = predict(model, b);
                        c_ape[c] = {};
                        c_ae[c] = {};
                        c_cnt[c] = {};
                        for (std::size_t i = lo; i < hi; ++i) {
                            const auto got = preds[i - lo].delogged();
                            const auto want = records.targets[i];
                            for (int k = 0; k < 4; ++k) {
                                c_ae[c][k] += std::abs(got[k] - want[k]);
                                if (want[k] != 0.0) {
                                    c_ape[c][k] += std::abs(got[k] - want[k]) / want[k];
                                    c_cnt[c][k] += 1;
                                }
                            }
                        }
                    });
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (int k = 0; k < 4; ++k) {
            ape_sum[k] += c_ape[c][k];
            ae_sum[k] += c_ae[c][k];
            ape_count[k] += c_cnt[c][k];
        }
    const double n = static_cast<double>(records.size());
    for (int k = 0; k < 4; ++k) {
        out.mae[k] = ae_sum[k] / n;
        out.mape[k] = ape_count[k] > 0
                          ? 100.0 * ape_sum[k] / static_cast<double>(ape_count[k])
                          : 0.0;
    }
    return out;
}

std::string metrics_log_csv(const std::vector<EpochLog>& log) {
    std::string out = "epoch,lr,train_loss,val_mae\n";
    for (const auto& e : log) {
        out += std::to_string(e.epoch);
        out += "," + format_double(e.lr);
        out += "," + format_double(e.train_loss);
        out += "," + format_double(e.val_mae);
        out += "\n";
    }
    return out;
}

}  // namespace hlsdse
