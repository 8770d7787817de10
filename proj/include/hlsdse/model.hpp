// model.hpp — graph network for latency/resource regression and the
// DeepSets baseline, with exact reverse-mode gradients via the tape.
//
// Architecture: an encoder maps node/edge/global features to hidden
// widths; T propagation layers update nodes from mean-aggregated incoming
// messages and update the global state through multi-head attention over
// nodes; a regression head pools nodes with its own attention block and
// maps [u || pooled] to the four log-space targets (LAT, FF, LUT, DSP).
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hlsdse/directives.hpp"
#include "hlsdse/tape.hpp"

namespace hlsdse {

struct Hyperparams {
    int propagation_layers = 4;
    int node_hidden = 128;
    int global_hidden = 256;
    int attention_heads = 2;
    int attention_hidden = 256;
    double attention_slope = 0.2;  // LeakyReLU slope on attention logits
    int head_outputs = 4;
    // DeepSets baseline
    int ds_hidden = 512;
    int ds_layers = 5;

    bool operator==(const Hyperparams&) const = default;
};

// Log-space model outputs; order LAT, FF, LUT, DSP.
struct Prediction {
    std::array<double, 4> log{};
    std::array<double, 4> delogged() const;
};

// Mean absolute error between log predictions and ln(1+target).
// Throws std::invalid_argument on negative targets.
double prediction_loss(const Prediction& pred, const std::array<double, 4>& target);
std::array<double, 4> to_log_targets(const std::array<double, 4>& target);

class ParamStore {
public:
    Matrix& add(const std::string& name, int rows, int cols);
    Matrix& at(const std::string& name);
    const Matrix& at(const std::string& name) const;
    bool has(const std::string& name) const;
    std::size_t count() const { return tensors_.size(); }
    std::size_t total_size() const;
    const std::vector<std::pair<std::string, Matrix>>& tensors() const { return tensors_; }
    std::vector<std::pair<std::string, Matrix>>& tensors() { return tensors_; }
    ParamStore zeros_like() const;

private:
    std::vector<std::pair<std::string, Matrix>> tensors_;
    std::map<std::string, int> index_;
};

struct GraphBatch {
    Matrix node_features;  // sum(N) x node_in
    Matrix edge_features;  // sum(E) x 3
    Matrix globals;        // B x 12
    Matrix targets_log;    // B x 4 when known, else 0x0
    BatchSegments seg;
};

GraphBatch make_batch(const std::vector<const EncodedGraph*>& graphs,
                      const std::vector<std::array<double, 4>>* targets = nullptr);

enum class ModelKind { Gnn, DeepSets };

struct Model {
    ModelKind kind = ModelKind::Gnn;
    Hyperparams hp;
    int node_in = 0;
    std::uint64_t schema_fingerprint = 0;
    ParamStore params;

    static Model init_gnn(int node_in, const Hyperparams& hp, std::uint64_t fingerprint,
                          std::uint64_t seed);
    static Model init_deepsets(int node_in, const Hyperparams& hp, std::uint64_t fingerprint,
                               std::uint64_t seed);
};

// Builds the forward computation on the tape and returns the B x 4
// prediction variable. When param_vars is given it receives (name, VarId)
// in store order, so gradients can be read after backward().
Tape::VarId model_forward(Tape& tape, const Model& model, const GraphBatch& batch,
                          std::vector<std::pair<std::string, Tape::VarId>>* param_vars = nullptr);

std::vector<Prediction> predict(const Model& model, const GraphBatch& batch);
Prediction predict_one(const Model& model, const EncodedGraph& graph);

// Batch loss (mean over records and targets) and parameter gradients,
// accumulated into `grads` (same tensor names as the model).
double loss_and_gradients(const Model& model, const GraphBatch& batch, ParamStore& grads);

// Intermediate states for tests and debugging.
struct ForwardTrace {
    Matrix v0, e_enc, u0;
    std::vector<Matrix> v;       // node states after each layer
    std::vector<Matrix> u;       // global state after each layer
    std::vector<Matrix> scores;  // attention per layer (N x heads)
    Matrix head_scores;
    Matrix pred;
};
ForwardTrace forward_trace(const Model& model, const GraphBatch& batch);

std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& document);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace hlsdse
