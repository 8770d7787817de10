// pipeline.hpp — end-to-end jobs shared by the CLI and the acceptance suite.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "hlsdse/data.hpp"
#include "hlsdse/dse.hpp"
#include "hlsdse/training.hpp"

namespace hlsdse {

struct TrainOutcome {
    Model model;
    std::vector<EpochLog> log;
    EvalMetrics test_metrics;                        // pooled over designs
    std::map<std::string, EvalMetrics> per_design;   // test split per design
};

TrainOutcome run_training_job(const Dataset& dataset, ModelKind kind, const Hyperparams& hp,
                              const TrainConfig& cfg, std::uint64_t split_seed);

// Byte-stable JSON for eval results.
std::string eval_report_json(const EvalMetrics& pooled,
                             const std::map<std::string, EvalMetrics>& per_design);

// Edge-ablation study: train + evaluate one model per graph setting.
struct AblationSetting {
    std::string name;  // full | no_data | no_param | control_only
    EvalMetrics metrics;
    double mean_mape = 0;  // over the four targets
};

std::vector<AblationSetting> run_ablation_job(const Dataset& dataset, const Hyperparams& hp,
                                              const TrainConfig& cfg, std::uint64_t split_seed);

std::string ablation_table_csv(const std::vector<AblationSetting>& settings);

// Leave-one-out DSE: pretrain on all designs except `target`, then explore
// the target with the paper-style budgets, once per seed.
struct LooDseOutcome {
    Model pretrained;
    std::vector<DseReport> runs;                 // one per seed
    std::vector<double> mean_adrs_per_front;     // averaged over seeds
    std::vector<double> mean_synth_per_front;
};

LooDseOutcome run_loo_dse(const Dataset& dataset, const std::string& target,
                          const Hyperparams& hp, const TrainConfig& pretrain_cfg,
                          const DseConfig& dse_cfg, const std::vector<std::uint64_t>& seeds);

// Oracle answering from a design's record set; throws on configurations
// that are not present.
OracleFn record_oracle(const Design& design);
// Config indices covered by the design's records (the synthesizable set).
std::vector<long long> synthesizable_set(const Design& design);

std::string loo_adrs_csv(const LooDseOutcome& outcome);

}  // namespace hlsdse
