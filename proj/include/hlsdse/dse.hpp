// dse.hpp — Pareto-front machinery, ADRS scoring, and the sample →
// fine-tune → predict → iterative-front exploration loop.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hlsdse/data.hpp"
#include "hlsdse/model.hpp"
#include "hlsdse/training.hpp"

namespace hlsdse {

struct CostPoint {
    double latency = 0;          // > 0
    double area = 0;             // >= 0
    long long config_index = -1;
};

struct DeviceProfile {
    double ff = 548160;
    double lut = 274080;
    double dsp = 2520;

    std::string serialize() const;
    static DeviceProfile deserialize(const std::string& document);
};

// FF/FF_avail + LUT/LUT_avail + DSP/DSP_avail. Throws on non-positive
// capacities.
double aggregate_area(double ff, double lut, double dsp, const DeviceProfile& caps);

// Indices of all points not dominated under (latency, area); duplicates of
// retained points are all retained.
std::vector<int> pareto_front(const std::vector<CostPoint>& points);

// Front 1 is the Pareto front; front k is the front of what remains after
// peeling fronts 1..k-1. Stops early when points run out.
std::vector<std::vector<int>> iterative_fronts(const std::vector<CostPoint>& points, int k);

// Average Distance from Reference Set between the reference front and an
// approximating front, d = max{0, (A_ap - A_ref)/A_ref, (L_ap - L_ref)/L_ref}.
// Throws on empty fronts.
double adrs(const std::vector<CostPoint>& reference, const std::vector<CostPoint>& approx);

using OracleFn = std::function<SynthesisRecord(const Configuration&)>;

struct DseConfig {
    FinetuneConfig finetune;
    int max_fronts = 5;  // K
    std::uint64_t seed = 0;
    DeviceProfile device;
    long long budget_override = -1;  // -1: min(128, ceil(5%))
    // Config indices that can be synthesized (empty: the whole space).
    // Sampling, candidate selection, and the reference front all stay
    // within this subset.
    std::vector<long long> synthesizable;
};

struct FrontOutcome {
    int front = 0;                         // 1-based
    std::vector<long long> new_queries;    // config indices first queried here
    long long synthesis_count = 0;         // cumulative
    double adrs_value = 0;                 // cumulative, vs the true front
};

struct QueryRow {
    long long config_index = -1;
    double pred_latency = 0, pred_area = 0;
    double true_latency = 0, true_area = 0;
};

struct DseReport {
    std::string design_id;
    long long space_size = 0;
    long long initial_samples = 0;
    std::vector<FrontOutcome> fronts;
    long long synthesis_count = 0;
    double final_adrs = 0;
    std::vector<long long> true_front_configs;  // among queried points
    std::vector<QueryRow> queried;

    std::string serialize() const;
    std::string adrs_table_csv() const;  // front,adrs,synthesis_count
};

// Exploration machinery on precomputed predictions (one CostPoint per
// synthesizable configuration, carrying its config index); `sampled` are
// config indices already queried (the fine-tuning samples).
DseReport explore_with_costs(const ConfigurationSpace& space,
                             const std::vector<CostPoint>& predicted, const OracleFn& oracle,
                             const std::vector<long long>& sampled, const DseConfig& cfg);

// Full protocol: uniform sampling without replacement, fine-tuning the
// pretrained model on the sampled records, predicting the whole space, and
// iterative front selection. A budget above the space size is clamped with
// a warning on stderr.
DseReport run_dse(const Model& pretrained, const HcdfgGraph& graph,
                  const ConfigurationSpace& space, const FeatureSchema& schema,
                  const OracleFn& oracle, const DseConfig& cfg);

}  // namespace hlsdse
