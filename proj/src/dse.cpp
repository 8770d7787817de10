#include "hlsdse/dse.hpp"

#include "hlsdse/tape.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <map>
#include <set>

#include "json.hpp"

namespace hlsdse {

std::string DeviceProfile::serialize() const {
    nlohmann::ordered_json j;
    j["ff"] = ff;
    j["lut"] = lut;
    j["dsp"] = dsp;
    return j.dump(2) + "\n";
}

DeviceProfile DeviceProfile::deserialize(const std::string& document) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("device profile is not valid JSON: ") + e.what());
    }
    DeviceProfile p;
    p.ff = j.at("ff").get<double>();
    p.lut = j.at("lut").get<double>();
    p.dsp = j.at("dsp").get<double>();
    if (p.ff <= 0 || p.lut <= 0 || p.dsp <= 0)
        throw SchemaError("device capacities must be positive");
    return p;
}

double aggregate_area(double ff, double lut, double dsp, const DeviceProfile& caps) {
    if (caps.ff <= 0 || caps.lut <= 0 || caps.dsp <= 0)
        throw std::invalid_argument("device capacities must be positive");
    return ff / caps.ff + lut / caps.lut + dsp / caps.dsp;
}

std::vector<int> pareto_front(const std::vector<CostPoint>& points) {
    const int n = static_cast<int>(points.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (points[a].latency != points[b].latency)
            return points[a].latency < points[b].latency;
        return points[a].area < points[b].area;
    });
    std::vector<int> front;
    double best_area_before = std::numeric_limits<double>::infinity();
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && points[order[j]].latency == points[order[i]].latency) ++j;
        const double group_min_area = points[order[i]].area;  // sorted within group
        if (group_min_area < best_area_before) {
            for (int k = i; k < j; ++k)
                if (points[order[k]].area == group_min_area) front.push_back(order[k]);
        }
        best_area_before = std::min(best_area_before, group_min_area);
        i = j;
    }
    std::sort(front.begin(), front.end());
    return front;
}

std::vector<std::vector<int>> iterative_fronts(const std::vector<CostPoint>& points, int k) {
    if (k < 1) throw std::invalid_argument("front count must be >= 1");
    std::vector<std::vector<int>> fronts;
    std::vector<int> alive(points.size());
    std::iota(alive.begin(), alive.end(), 0);
    for (int round = 0; round < k && !alive.empty(); ++round) {
        std::vector<CostPoint> sub;
        sub.reserve(alive.size());
        for (int idx : alive) sub.push_back(points[idx]);
        std::vector<int> local = pareto_front(sub);
        std::vector<int> global;
        global.reserve(local.size());
        for (int l : local) global.push_back(alive[l]);
        std::set<int> taken(global.begin(), global.end());
        std::vector<int> rest;
        rest.reserve(alive.size() - global.size());
        for (int idx : alive)
            if (!taken.count(idx)) rest.push_back(idx);
        fronts.push_back(std::move(global));
        alive = std::move(rest);
    }
    return fronts;
}

double adrs(const std::vector<CostPoint>& reference, const std::vector<CostPoint>& approx) {
    if (reference.empty() || approx.empty())
        throw std::invalid_argument("ADRS needs nonempty fronts");
    double total = 0;
    for (const auto& ref : reference) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& ap : approx) {
            const double d = std::max(
                {0.0, (ap.area - ref.area) / ref.area, (ap.latency - ref.latency) / ref.latency});
            best = std::min(best, d);
        }
        total += best;
    }
    return total / static_cast<double>(reference.size());
}

namespace {

CostPoint record_cost(const SynthesisRecord& r, long long config_index,
                      const DeviceProfile& device) {
    CostPoint p;
    p.latency = std::max(r.lat, 1e-12);
    p.area = aggregate_area(static_cast<double>(r.ff), static_cast<double>(r.lut),
                            static_cast<double>(r.dsp), device);
    p.config_index = config_index;
    return p;
}

std::vector<CostPoint> subset(const std::vector<CostPoint>& points,
                              const std::vector<int>& idx) {
    std::vector<CostPoint> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(points[i]);
    return out;
}

}  // namespace

DseReport explore_with_costs(const ConfigurationSpace& space,
                             const std::vector<CostPoint>& predicted, const OracleFn& oracle,
                             const std::vector<long long>& sampled, const DseConfig& cfg) {
    if (predicted.empty()) throw std::invalid_argument("no predictions given");
    DseReport report;
    report.design_id = space.design_id;
    report.space_size = space.size();
    report.initial_samples = static_cast<long long>(sampled.size());

    // Ground truth over the synthesizable set (used for scoring only).
    std::map<long long, CostPoint> truth;
    for (const auto& p : predicted)
        truth[p.config_index] =
            record_cost(oracle(config_at(space, p.config_index)), p.config_index, cfg.device);
    std::vector<CostPoint> truth_points;
    truth_points.reserve(truth.size());
    for (const auto& [idx, p] : truth) truth_points.push_back(p);
    const std::vector<CostPoint> truth_front = subset(truth_points, pareto_front(truth_points));

    std::map<long long, const CostPoint*> predicted_by_index;
    for (const auto& p : predicted) predicted_by_index[p.config_index] = &p;
    std::set<long long> queried(sampled.begin(), sampled.end());
    for (long long s : sampled) {
        if (!truth.count(s))
            throw std::invalid_argument("sampled configuration outside the synthesizable set");
        QueryRow row;
        row.config_index = s;
        row.pred_latency = predicted_by_index.at(s)->latency;
        row.pred_area = predicted_by_index.at(s)->area;
        row.true_latency = truth.at(s).latency;
        row.true_area = truth.at(s).area;
        report.queried.push_back(row);
    }

    auto fronts = iterative_fronts(predicted, cfg.max_fronts);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        FrontOutcome outcome;
        outcome.front = static_cast<int>(f) + 1;
        // deterministic candidate order: (latency, area, config index)
        std::vector<int> cand = fronts[f];
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            const auto& pa = predicted[a];
            const auto& pb = predicted[b];
            return std::tie(pa.latency, pa.area, pa.config_index) <
                   std::tie(pb.latency, pb.area, pb.config_index);
        });
        for (int c : cand) {
            const long long idx = predicted[c].config_index;
            if (queried.count(idx)) continue;
            queried.insert(idx);
            outcome.new_queries.push_back(idx);
            QueryRow row;
            row.config_index = idx;
            row.pred_latency = predicted[c].latency;
            row.pred_area = predicted[c].area;
            row.true_latency = truth.at(idx).latency;
            row.true_area = truth.at(idx).area;
            report.queried.push_back(row);
        }
        outcome.synthesis_count = static_cast<long long>(queried.size());
        std::vector<CostPoint> discovered;
        discovered.reserve(queried.size());
        for (long long q : queried) discovered.push_back(truth.at(q));
        const std::vector<CostPoint> approx_front =
            subset(discovered, pareto_front(discovered));
        outcome.adrs_value = adrs(truth_front, approx_front);
        report.fronts.push_back(std::move(outcome));
    }

    report.synthesis_count = static_cast<long long>(queried.size());
    report.final_adrs = report.fronts.empty() ? 0.0 : report.fronts.back().adrs_value;
    std::vector<CostPoint> discovered;
    discovered.reserve(queried.size());
    for (long long q : queried) discovered.push_back(truth.at(q));
    for (int i : pareto_front(discovered))
        report.true_front_configs.push_back(discovered[i].config_index);
    return report;
}

DseReport run_dse(const Model& pretrained, const HcdfgGraph& graph,
                  const ConfigurationSpace& space, const FeatureSchema& schema,
                  const OracleFn& oracle, const DseConfig& cfg) {
    std::vector<long long> pool = cfg.synthesizable;
    if (pool.empty()) {
        pool.resize(space.size());
        std::iota(pool.begin(), pool.end(), 0);
    }
    const long long size = static_cast<long long>(pool.size());
    long long budget = cfg.budget_override > 0 ? cfg.budget_override
                                               : FinetuneConfig::sample_budget(size);
    if (budget > size) {
        std::cerr << "warning: sample budget " << budget << " exceeds the synthesizable set ("
                  << size << "); clamping\n";
        budget = size;
    }

    // uniform sampling without replacement
    std::mt19937_64 rng(cfg.seed);
    std::vector<long long> all = pool;
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<long long> sampled(all.begin(), all.begin() + budget);
    std::sort(sampled.begin(), sampled.end());

    // fine-tune on the sampled records
    TrainingSet target;
    for (long long s : sampled) {
        const Configuration c = config_at(space, s);
        const SynthesisRecord r = oracle(c);
        target.graphs.push_back(encode_features(graph, space, c, schema));
        target.targets.push_back(r.targets());
        target.design_ids.push_back(space.design_id);
    }
    FinetuneConfig ft = cfg.finetune;
    ft.seed = cfg.seed;
    Model tuned = finetune(pretrained, target, ft);

    // predict every synthesizable configuration
    std::vector<CostPoint> predicted(pool.size());
    parallel_chunks(pool.size(), 256, compute_threads(),
                    [&](int, std::size_t lo, std::size_t hi) {
                        std::vector<EncodedGraph> graphs;
                        std::vector<const EncodedGraph*> ptrs;
                        graphs.reserve(hi - lo);
                        for (std::size_t i = lo; i < hi; ++i)
                            graphs.push_back(encode_features(
                                graph, space, config_at(space, pool[i]), schema));
                        for (const auto& g : graphs) ptrs.push_back(&g);
                        const std::vector<Prediction> preds = predict(tuned, make_batch(ptrs));
                        for (std::size_t i = lo; i < hi; ++i) {
                            const auto v = preds[i - lo].delogged();
                            CostPoint p;
                            p.latency = std::max(v[0], 1e-12);
                            p.area = aggregate_area(v[1], v[2], v[3], cfg.device);
                            p.config_index = pool[i];
                            predicted[i] = p;
                        }
                    });

    return explore_with_costs(space, predicted, oracle, sampled, cfg);
}

std::string DseReport::serialize() const {
    nlohmann::ordered_json j;
    j["design_id"] = design_id;
    j["space_size"] = space_size;
    j["initial_samples"] = initial_samples;
    j["synthesis_count"] = synthesis_count;
    j["final_adrs"] = final_adrs;
    j["fronts"] = nlohmann::ordered_json::array();
    for (const auto& f : fronts) {
        nlohmann::ordered_json jf;
        jf["front"] = f.front;
        jf["new_queries"] = f.new_queries;
        jf["synthesis_count"] = f.synthesis_count;
        jf["adrs"] = f.adrs_value;
        j["fronts"].push_back(std::move(jf));
    }
    j["true_front_configs"] = true_front_configs;
    j["queried"] = nlohmann::ordered_json::array();
    for (const auto& q : queried) {
        nlohmann::ordered_json jq;
        jq["config_index"] = q.config_index;
        jq["pred_latency"] = q.pred_latency;
        jq["pred_area"] = q.pred_area;
        jq["true_latency"] = q.true_latency;
        jq["true_area"] = q.true_area;
        j["queried"].push_back(std::move(jq));
    }
    return j.dump(2) + "\n";
}

std::string DseReport::adrs_table_csv() const {
    std::string out = "front,adrs,synthesis_count\n";
    for (const auto& f : fronts) {
        out += std::to_string(f.front);
        out += "," + format_double(f.adrs_value);
        out += "," + std::to_string(f.synthesis_count);
        out += "\n";
    }
    return out;
}

}  // namespace hlsdse
