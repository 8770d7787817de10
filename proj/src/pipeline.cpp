#include "hlsdse/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace hlsdse {

TrainOutcome run_training_job(const Dataset& dataset, ModelKind kind, const Hyperparams& hp,
                              const TrainConfig& cfg, std::uint64_t split_seed) {
    if (dataset.designs.empty()) throw std::invalid_argument("dataset has no designs");
    const auto splits = split(dataset, split_seed);
    TrainingSet tr = encode_split(dataset, splits, Section::Train);
    TrainingSet val = encode_split(dataset, splits, Section::Val);
    TrainingSet test = encode_split(dataset, splits, Section::Test);

    const std::uint64_t fp = dataset.schema.fingerprint();
    Model model = kind == ModelKind::Gnn
                      ? Model::init_gnn(dataset.schema.node_width(), hp, fp, cfg.seed)
                      : Model::init_deepsets(dataset.schema.node_width(), hp, fp, cfg.seed);
    TrainResult result = train(model, tr, val, cfg);

    TrainOutcome out;
    out.model = result.best;
    out.log = std::move(result.log);
    out.test_metrics = evaluate(out.model, test);
    for (const auto& design : dataset.designs) {
        std::vector<ExampleRef> refs;
        const int d = static_cast<int>(&design - dataset.designs.data());
        for (int r : splits.at(design.id()).test) refs.push_back({d, r});
        TrainingSet per = encode_examples(dataset, refs);
        out.per_design[design.id()] = evaluate(out.model, per);
    }
    return out;
}

namespace {

nlohmann::ordered_json metrics_json(const EvalMetrics& m) {
    nlohmann::ordered_json j;
    const char* names[4] = {"LAT", "FF", "LUT", "DSP"};
    for (int k = 0; k < 4; ++k) {
        j[names[k]] = {{"mape_percent", m.mape[k]}, {"mae", m.mae[k]}};
    }
    double mean = 0;
    for (int k = 0; k < 4; ++k) mean += m.mape[k];
    j["mean_mape_percent"] = mean / 4.0;
    return j;
}

}  // namespace

std::string eval_report_json(const EvalMetrics& pooled,
                             const std::map<std::string, EvalMetrics>& per_design) {
    nlohmann::ordered_json j;
    j["overall"] = metrics_json(pooled);
    j["designs"] = nlohmann::ordered_json::object();
    for (const auto& [name, m] : per_design) j["designs"][name] = metrics_json(m);
    return j.dump(2) + "\n";
}

std::vector<AblationSetting> run_ablation_job(const Dataset& dataset, const Hyperparams& hp,
                                              const TrainConfig& cfg,
                                              std::uint64_t split_seed) {
    struct Plan {
        const char* name;
        std::set<EdgeKind> removed;
    };
    const Plan plans[4] = {
        {"full", {}},
        {"no_data", {EdgeKind::Data}},
        {"no_param", {EdgeKind::ParamFlow}},
        {"control_only", {EdgeKind::Data, EdgeKind::ParamFlow}},
    };
    std::vector<AblationSetting> out;
    for (const auto& plan : plans) {
        Dataset ablated = dataset;
        for (auto& design : ablated.designs)
            design.graph = ablate_edges(design.graph, plan.removed);
        TrainOutcome o = run_training_job(ablated, ModelKind::Gnn, hp, cfg, split_seed);
        AblationSetting s;
        s.name = plan.name;
        s.metrics = o.test_metrics;
        for (int k = 0; k < 4; ++k) s.mean_mape += o.test_metrics.mape[k];
        s.mean_mape /= 4.0;
        out.push_back(std::move(s));
    }
    return out;
}

std::string ablation_table_csv(const std::vector<AblationSetting>& settings) {
    std::string out = "setting,mape_lat,mape_ff,mape_lut,mape_dsp,mean_mape\n";
    for (const auto& s : settings) {
        out += s.name;
        for (int k = 0; k < 4; ++k) out += "," + format_double(s.metrics.mape[k]);
        out += "," + format_double(s.mean_mape);
        out += "\n";
    }
    return out;
}

OracleFn record_oracle(const Design& design) {
    auto index = std::make_shared<std::map<long long, SynthesisRecord>>();
    for (const auto& r : design.records)
        (*index)[config_index(design.space, r.config)] = r;
    const ConfigurationSpace* space = &design.space;
    return [index, space](const Configuration& c) {
        auto it = index->find(config_index(*space, c));
        if (it == index->end())
            throw std::out_of_range("configuration has no synthesis record");
        return it->second;
    };
}

std::vector<long long> synthesizable_set(const Design& design) {
    std::vector<long long> out;
    out.reserve(design.records.size());
    for (const auto& r : design.records) out.push_back(config_index(design.space, r.config));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

LooDseOutcome run_loo_dse(const Dataset& dataset, const std::string& target,
                          const Hyperparams& hp, const TrainConfig& pretrain_cfg,
                          const DseConfig& dse_cfg, const std::vector<std::uint64_t>& seeds) {
    const Design* held_out = dataset.find(target);
    if (!held_out) throw std::invalid_argument("unknown design \"" + target + "\"");
    Dataset sources;
    sources.schema = dataset.schema;
    for (const auto& d : dataset.designs)
        if (d.id() != target) sources.designs.push_back(d);
    if (sources.designs.empty())
        throw std::invalid_argument("leave-one-out needs at least two designs");

    LooDseOutcome out;
    out.pretrained =
        run_training_job(sources, ModelKind::Gnn, hp, pretrain_cfg, pretrain_cfg.seed).model;

    OracleFn oracle = record_oracle(*held_out);
    DseConfig cfg = dse_cfg;
    cfg.synthesizable = synthesizable_set(*held_out);
    for (std::uint64_t seed : seeds) {
        cfg.seed = seed;
        out.runs.push_back(run_dse(out.pretrained, held_out->graph, held_out->space,
                                   dataset.schema, oracle, cfg));
    }

    const int k = dse_cfg.max_fronts;
    out.mean_adrs_per_front.assign(k, 0.0);
    out.mean_synth_per_front.assign(k, 0.0);
    for (const auto& run : out.runs) {
        for (int f = 0; f < k; ++f) {
            // runs can exhaust the space before K fronts; carry the last value
            const auto& fo = run.fronts[std::min<std::size_t>(f, run.fronts.size() - 1)];
            out.mean_adrs_per_front[f] += fo.adrs_value;
            out.mean_synth_per_front[f] += static_cast<double>(fo.synthesis_count);
        }
    }
    for (int f = 0; f < k; ++f) {
        out.mean_adrs_per_front[f] /= static_cast<double>(out.runs.size());
        out.mean_synth_per_front[f] /= static_cast<double>(out.runs.size());
    }
    return out;
}

std::string loo_adrs_csv(const LooDseOutcome& outcome) {
    std::string out = "front,mean_adrs,mean_synthesis_count\n";
    for (std::size_t f = 0; f < outcome.mean_adrs_per_front.size(); ++f) {
        out += std::to_string(f + 1);
        out += "," + format_double(outcome.mean_adrs_per_front[f]);
        out += "," + format_double(outcome.mean_synth_per_front[f]);
        out += "\n";
    }
    return out;
}

}  // namespace hlsdse
