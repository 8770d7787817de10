// training.hpp — optimization loops and metric evaluation.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hlsdse/data.hpp"
#include "hlsdse/model.hpp"

namespace hlsdse {

struct TrainConfig {
    int epochs = 800;
    int batch_size = 128;
    double lr = 0.001;
    double lr_min = 0.0001;  // cosine annealing floor, no restarts
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double grad_clip_norm = 3.0;
    std::uint64_t seed = 0;
};

struct FinetuneConfig {
    int updates = 150;
    int batch_size = 32;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double grad_clip_norm = 10.0;
    std::uint64_t seed = 0;

    // min(128, ceil(0.05 * |X_D|))
    static long long sample_budget(long long space_size);
};

std::string serialize_train_config(const TrainConfig& cfg);
TrainConfig deserialize_train_config(const std::string& document);

// Cosine-annealed learning rate at a given epoch (0-based).
double lr_at_epoch(const TrainConfig& cfg, int epoch);

// --- dataset splitting --------------------------------------------------

struct SplitIndices {
    std::vector<int> train, val, test;  // record indices within the design
};

// 70/10/20 per design (floor val, floor test, remainder train),
// deterministic in (seed, design_id). Throws if a design has < 10 records.
std::map<std::string, SplitIndices> split(const Dataset& dataset, std::uint64_t seed);

// --- encoded example sets -------------------------------------------------

struct TrainingSet {
    std::vector<EncodedGraph> graphs;
    std::vector<std::array<double, 4>> targets;
    std::vector<std::string> design_ids;

    std::size_t size() const { return graphs.size(); }
};

struct ExampleRef {
    int design = 0;
    int record = 0;
};

TrainingSet encode_examples(const Dataset& dataset, const std::vector<ExampleRef>& refs);
// All records of the named split section across designs.
enum class Section { Train, Val, Test };
TrainingSet encode_split(const Dataset& dataset,
                         const std::map<std::string, SplitIndices>& splits, Section section);

// --- optimization ---------------------------------------------------------

struct EpochLog {
    int epoch = 0;
    double lr = 0;
    double train_loss = 0;
    double val_mae = 0;  // log-space, same space as the loss
};

struct TrainResult {
    Model best;
    std::vector<EpochLog> log;
    double best_val_mae = 0;
    int best_epoch = -1;
};

// Supervised training with per-epoch validation; returns the parameters of
// the epoch with the lowest validation MAE. Aborts with diagnostics on a
// non-finite loss.
TrainResult train(const Model& model, const TrainingSet& train_set,
                  const TrainingSet& val_set, const TrainConfig& cfg);

// Exactly cfg.updates Adam steps at constant lr over reshuffled minibatches;
// returns the final parameters.
Model finetune(const Model& pretrained, const TrainingSet& target_records,
               const FinetuneConfig& cfg);

// Log-space mean absolute error (the training/validation metric).
double log_space_mae(const Model& model, const TrainingSet& set);

// Global-norm gradient clipping; returns the pre-clip norm.
double clip_gradients(ParamStore& grads, double max_norm);

struct EvalMetrics {
    std::array<double, 4> mape{};  // percent; 0.0 when all targets are zero
    std::array<double, 4> mae{};   // original (de-logged) units
};

EvalMetrics evaluate(const Model& model, const TrainingSet& records);

std::string metrics_log_csv(const std::vector<EpochLog>& log);

}  // namespace hlsdse
