// hlsdse — graph-based latency/resource estimation and design-space
// exploration for HLS-style directive tuning.
//
// Subcommands: extract, gen-synthetic, train, predict, eval, finetune,
// dse, ablate. See --help on each.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"
#include "hlsdse/frontend.hpp"
#include "hlsdse/pipeline.hpp"
#include "hlsdse/tape.hpp"

namespace fs = std::filesystem;
using namespace hlsdse;

namespace {

DeviceProfile load_device(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty()) {
        const char* env = std::getenv("HLSDSE_DEVICE_PROFILE");
        if (env) path = env;
    }
    if (path.empty()) return DeviceProfile{};
    return DeviceProfile::deserialize(read_text_file(path));
}

Model load_checkpoint_for(const Dataset& dataset, const std::string& path) {
    Model m = load_model(path);
    if (m.schema_fingerprint != dataset.schema.fingerprint())
        throw SchemaError("checkpoint feature schema does not match the dataset");
    return m;
}

Section section_from_string(const std::string& s) {
    if (s == "train") return Section::Train;
    if (s == "val") return Section::Val;
    if (s == "test") return Section::Test;
    throw std::runtime_error("--section must be train, val, or test");
}

void write_train_outputs(const std::string& out_dir, const TrainOutcome& outcome) {
    fs::create_directories(out_dir);
    save_model(outcome.model, (fs::path(out_dir) / "checkpoint.json").string());
    write_text_file((fs::path(out_dir) / "metrics.csv").string(),
                    metrics_log_csv(outcome.log));
    write_text_file((fs::path(out_dir) / "eval.json").string(),
                    eval_report_json(outcome.test_metrics, outcome.per_design));
}

void print_metrics(const EvalMetrics& m) {
    const char* names[4] = {"LAT", "FF", "LUT", "DSP"};
    for (int k = 0; k < 4; ++k)
        std::cout << names[k] << ": MAPE " << format_double(m.mape[k]) << "% MAE "
                  << format_double(m.mae[k]) << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"graph-learning toolkit for HLS latency/resource estimation and DSE"};
    app.require_subcommand(1);
    app.fallthrough();
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker threads for batched compute (default 1)");

    auto* cmd_extract =
        app.add_subcommand("extract", "build a hybrid CDFG from a C-subset source");
    std::string ex_source, ex_out;
    cmd_extract->add_option("source", ex_source, "input source file")->required();
    cmd_extract->add_option("-o,--out", ex_out, "output graph file")->required();

    auto* cmd_gen = app.add_subcommand("gen-synthetic", "generate a synthetic dataset");
    std::string gen_out;
    int gen_designs = 5;
    std::uint64_t gen_seed = 1;
    cmd_gen->add_option("--out", gen_out, "output dataset directory")->required();
    cmd_gen->add_option("--designs", gen_designs, "number of designs (max 8, default 5)");
    cmd_gen->add_option("--seed", gen_seed, "generator seed");

    auto* cmd_train = app.add_subcommand("train", "train an estimation model");
    std::string tr_data, tr_out, tr_model = "gnn", tr_cfg_path;
    TrainConfig tr_cfg;
    std::uint64_t tr_split_seed = 0;
    bool tr_split_seed_set = false;
    cmd_train->add_option("--data", tr_data, "dataset directory")->required();
    cmd_train->add_option("--out", tr_out, "output directory")->required();
    cmd_train->add_option("--model", tr_model, "gnn or deepsets (default gnn)");
    cmd_train->add_option("--config", tr_cfg_path, "training config file (JSON)");
    cmd_train->add_option("--epochs", tr_cfg.epochs, "epochs (default 800)");
    cmd_train->add_option("--batch-size", tr_cfg.batch_size, "batch size (default 128)");
    cmd_train->add_option("--lr", tr_cfg.lr, "initial learning rate (default 0.001)");
    cmd_train->add_option("--lr-min", tr_cfg.lr_min, "cosine floor (default 0.0001)");
    cmd_train->add_option("--clip", tr_cfg.grad_clip_norm, "gradient norm clip (default 3)");
    cmd_train->add_option("--seed", tr_cfg.seed, "init/shuffle seed");
    cmd_train
        ->add_option("--split-seed", tr_split_seed, "dataset split seed (default: --seed)")
        ->each([&](const std::string&) { tr_split_seed_set = true; });

    auto* cmd_predict = app.add_subcommand("predict", "predict one configuration");
    std::string pr_ck, pr_graph, pr_space, pr_schema, pr_out;
    long long pr_index = 0;
    cmd_predict->add_option("--checkpoint", pr_ck, "model checkpoint")->required();
    cmd_predict->add_option("--graph", pr_graph, "graph file")->required();
    cmd_predict->add_option("--space", pr_space, "configuration space file")->required();
    cmd_predict->add_option("--config-index", pr_index,
                            "lexicographic configuration index (default 0)");
    cmd_predict->add_option("--schema", pr_schema,
                            "feature schema manifest (default built-in)");
    cmd_predict->add_option("--out", pr_out, "write prediction JSON here");

    auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
    std::string ev_ck, ev_data, ev_section = "test", ev_out;
    std::uint64_t ev_split_seed = 0;
    cmd_eval->add_option("--checkpoint", ev_ck, "model checkpoint")->required();
    cmd_eval->add_option("--data", ev_data, "dataset directory")->required();
    cmd_eval->add_option("--section", ev_section, "train|val|test (default test)");
    cmd_eval->add_option("--split-seed", ev_split_seed, "dataset split seed (default 0)");
    cmd_eval->add_option("--out", ev_out, "write metrics JSON here");

    auto* cmd_ft = app.add_subcommand("finetune", "adapt a checkpoint to one design");
    std::string ft_ck, ft_data, ft_design, ft_out;
    FinetuneConfig ft_cfg;
    long long ft_samples = -1;
    cmd_ft->add_option("--checkpoint", ft_ck, "pretrained checkpoint")->required();
    cmd_ft->add_option("--data", ft_data, "dataset directory")->required();
    cmd_ft->add_option("--design", ft_design, "target design id")->required();
    cmd_ft->add_option("--out", ft_out, "output checkpoint path")->required();
    cmd_ft->add_option("--samples", ft_samples,
                       "sample count (default min(128, ceil(5% of space)))");
    cmd_ft->add_option("--updates", ft_cfg.updates, "optimizer updates (default 150)");
    cmd_ft->add_option("--batch-size", ft_cfg.batch_size, "batch size (default 32)");
    cmd_ft->add_option("--lr", ft_cfg.lr, "constant learning rate (default 0.001)");
    cmd_ft->add_option("--clip", ft_cfg.grad_clip_norm, "gradient norm clip (default 10)");
    cmd_ft->add_option("--seed", ft_cfg.seed, "sampling/shuffle seed");

    auto* cmd_dse = app.add_subcommand("dse", "explore a design with a pretrained model");
    std::string ds_ck, ds_data, ds_design, ds_device, ds_out;
    DseConfig ds_cfg;
    cmd_dse->add_option("--checkpoint", ds_ck, "pretrained checkpoint")->required();
    cmd_dse->add_option("--data", ds_data, "dataset directory")->required();
    cmd_dse->add_option("--design", ds_design, "target design id")->required();
    cmd_dse->add_option("--out", ds_out, "output directory")->required();
    cmd_dse->add_option("--seed", ds_cfg.seed, "sampling seed");
    cmd_dse->add_option("--fronts", ds_cfg.max_fronts, "Pareto fronts to expand (default 5)");
    cmd_dse->add_option("--budget", ds_cfg.budget_override,
                        "initial sample budget (default min(128, 5%))");
    cmd_dse->add_option("--updates", ds_cfg.finetune.updates,
                        "fine-tune updates (default 150)");
    cmd_dse->add_option("--batch-size", ds_cfg.finetune.batch_size,
                        "fine-tune batch size (default 32)");
    cmd_dse->add_option("--device", ds_device,
                        "device profile JSON (default $HLSDSE_DEVICE_PROFILE or built-in)");

    auto* cmd_ab =
        app.add_subcommand("ablate", "edge-ablation study (train one model per setting)");
    std::string ab_data, ab_out;
    TrainConfig ab_cfg;
    ab_cfg.epochs = 40;
    std::uint64_t ab_split_seed = 0;
    cmd_ab->add_option("--data", ab_data, "dataset directory")->required();
    cmd_ab->add_option("--out", ab_out, "output directory")->required();
    cmd_ab->add_option("--epochs", ab_cfg.epochs, "epochs per setting (default 40)");
    cmd_ab->add_option("--batch-size", ab_cfg.batch_size, "batch size (default 128)");
    cmd_ab->add_option("--seed", ab_cfg.seed, "init/shuffle seed");
    cmd_ab->add_option("--split-seed", ab_split_seed, "dataset split seed (default 0)");

    CLI11_PARSE(app, argc, argv);
    set_compute_threads(jobs);

    if (*cmd_extract) {
        HcdfgGraph graph = extract_graph(read_text_file(ex_source));
        auto violations = validate(graph);
        if (!violations.empty())
            throw std::runtime_error("extracted graph failed validation: " +
                                     violations[0].rule + " at " + violations[0].where);
        save_graph(graph, ex_out);
        std::cout << "wrote " << ex_out << " (" << graph.nodes.size() << " nodes, "
                  << graph.edges.size() << " edges)\n";
        return 0;
    }

    if (*cmd_gen) {
        Dataset ds = generate_dataset(gen_designs, gen_seed);
        save_dataset(ds, gen_out);
        std::cout << "wrote " << ds.designs.size() << " designs, " << ds.total_records()
                  << " records to " << gen_out << "\n";
        return 0;
    }

    if (*cmd_train) {
        if (!tr_cfg_path.empty()) {
            TrainConfig file_cfg = deserialize_train_config(read_text_file(tr_cfg_path));
            // command-line flags override the file
            TrainConfig defaults;
            if (tr_cfg.epochs == defaults.epochs) tr_cfg.epochs = file_cfg.epochs;
            if (tr_cfg.batch_size == defaults.batch_size)
                tr_cfg.batch_size = file_cfg.batch_size;
            if (tr_cfg.lr == defaults.lr) tr_cfg.lr = file_cfg.lr;
            if (tr_cfg.lr_min == defaults.lr_min) tr_cfg.lr_min = file_cfg.lr_min;
            if (tr_cfg.grad_clip_norm == defaults.grad_clip_norm)
                tr_cfg.grad_clip_norm = file_cfg.grad_clip_norm;
            if (tr_cfg.seed == defaults.seed) tr_cfg.seed = file_cfg.seed;
        }
        Dataset ds = ingest(tr_data);
        const ModelKind kind = tr_model == "deepsets" ? ModelKind::DeepSets : ModelKind::Gnn;
        const std::uint64_t split_seed = tr_split_seed_set ? tr_split_seed : tr_cfg.seed;
        TrainOutcome outcome = run_training_job(ds, kind, Hyperparams{}, tr_cfg, split_seed);
        write_train_outputs(tr_out, outcome);
        std::cout << "test metrics (pooled):\n";
        print_metrics(outcome.test_metrics);
        return 0;
    }

    if (*cmd_predict) {
        FeatureSchema schema = pr_schema.empty()
                                   ? FeatureSchema{}
                                   : FeatureSchema::deserialize(read_text_file(pr_schema));
        Model model = load_model(pr_ck);
        if (model.schema_fingerprint != schema.fingerprint())
            throw SchemaError("checkpoint feature schema does not match --schema");
        HcdfgGraph graph = load_graph(pr_graph);
        ConfigurationSpace space = load_space(pr_space, schema);
        if (pr_index < 0 || pr_index >= space.size())
            throw std::runtime_error("config index out of range");
        EncodedGraph enc = encode_features(graph, space, config_at(space, pr_index), schema);
        const auto t0 = std::chrono::steady_clock::now();
        Prediction pred = predict_one(model, enc);
        const auto t1 = std::chrono::steady_clock::now();
        const auto v = pred.delogged();
        nlohmann::ordered_json j;
        j["design_id"] = graph.design_id;
        j["config_index"] = pr_index;
        j["LAT"] = v[0];
        j["FF"] = v[1];
        j["LUT"] = v[2];
        j["DSP"] = v[3];
        std::cout << j.dump(2) << "\n";
        std::cout << "inference_ms="
                  << format_double(
                         std::chrono::duration<double, std::milli>(t1 - t0).count())
                  << "\n";
        if (!pr_out.empty()) write_text_file(pr_out, j.dump(2) + "\n");
        return 0;
    }

    if (*cmd_eval) {
        Dataset ds = ingest(ev_data);
        Model model = load_checkpoint_for(ds, ev_ck);
        const auto splits = split(ds, ev_split_seed);
        TrainingSet set = encode_split(ds, splits, section_from_string(ev_section));
        EvalMetrics pooled = evaluate(model, set);
        std::map<std::string, EvalMetrics> per_design;
        for (const auto& design : ds.designs) {
            std::vector<ExampleRef> refs;
            const int d = static_cast<int>(&design - ds.designs.data());
            const auto& s = splits.at(design.id());
            const std::vector<int>& idx = ev_section == "train"  ? s.train
                                          : ev_section == "val" ? s.val
                                                                : s.test;
            for (int r : idx) refs.push_back({d, r});
            per_design[design.id()] = evaluate(model, encode_examples(ds, refs));
        }
        print_metrics(pooled);
        if (!ev_out.empty()) write_text_file(ev_out, eval_report_json(pooled, per_design));
        return 0;
    }

    if (*cmd_ft) {
        Dataset ds = ingest(ft_data);
        Model model = load_checkpoint_for(ds, ft_ck);
        const Design* design = ds.find(ft_design);
        if (!design) throw std::runtime_error("unknown design \"" + ft_design + "\"");
        long long budget =
            ft_samples > 0 ? ft_samples
                           : FinetuneConfig::sample_budget(
                                 static_cast<long long>(design->records.size()));
        budget = std::min<long long>(budget,
                                     static_cast<long long>(design->records.size()));
        std::vector<int> order(design->records.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(ft_cfg.seed);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<ExampleRef> refs;
        const int d = static_cast<int>(design - ds.designs.data());
        for (long long i = 0; i < budget; ++i)
            refs.push_back({d, order[static_cast<std::size_t>(i)]});
        TrainingSet target = encode_examples(ds, refs);
        Model tuned = finetune(model, target, ft_cfg);
        save_model(tuned, ft_out);
        std::cout << "fine-tuned on " << budget << " records of " << ft_design << " -> "
                  << ft_out << "\n";
        return 0;
    }

    if (*cmd_dse) {
        Dataset ds = ingest(ds_data);
        Model model = load_checkpoint_for(ds, ds_ck);
        const Design* design = ds.find(ds_design);
        if (!design) throw std::runtime_error("unknown design \"" + ds_design + "\"");
        ds_cfg.device = load_device(ds_device);
        ds_cfg.finetune.seed = ds_cfg.seed;
        ds_cfg.synthesizable = synthesizable_set(*design);
        DseReport report = run_dse(model, design->graph, design->space, ds.schema,
                                   record_oracle(*design), ds_cfg);
        fs::create_directories(ds_out);
        write_text_file((fs::path(ds_out) / "report.json").string(), report.serialize());
        write_text_file((fs::path(ds_out) / "adrs.csv").string(), report.adrs_table_csv());
        std::cout << "final ADRS " << format_double(report.final_adrs) << " after "
                  << report.synthesis_count << " syntheses\n";
        return 0;
    }

    if (*cmd_ab) {
        Dataset ds = ingest(ab_data);
        auto settings = run_ablation_job(ds, Hyperparams{}, ab_cfg, ab_split_seed);
        const std::string csv = ablation_table_csv(settings);
        fs::create_directories(ab_out);
        write_text_file((fs::path(ab_out) / "ablate.csv").string(), csv);
        std::cout << csv;
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
