// data.hpp — dataset layout, record files, and the synthetic oracle used
// for desk-scale end-to-end experiments.
//
// Dataset directory layout:
//   <root>/manifest.json                  design list + feature schema
//   <root>/<design>/graph.json
//   <root>/<design>/space.json
//   <root>/<design>/records.csv           design_id, one column per directive,
//                                         LAT, FF, LUT, DSP
//   <root>/<design>/source.c              reference copy of the kernel
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hlsdse/directives.hpp"
#include "hlsdse/frontend.hpp"
#include "hlsdse/graph_ir.hpp"

namespace hlsdse {

struct SynthesisRecord {
    std::string design_id;
    Configuration config;
    double lat = 0.0;
    std::int64_t ff = 0;
    std::int64_t lut = 0;
    std::int64_t dsp = 0;

    std::array<double, 4> targets() const {
        return {lat, static_cast<double>(ff), static_cast<double>(lut),
                static_cast<double>(dsp)};
    }
};

struct Design {
    HcdfgGraph graph;
    ConfigurationSpace space;
    std::vector<SynthesisRecord> records;
    std::string source;  // mini-C text when available

    const std::string& id() const { return graph.design_id; }
};

struct Dataset {
    FeatureSchema schema;
    std::vector<Design> designs;

    const Design* find(const std::string& design_id) const;
    std::size_t total_records() const;
};

std::string serialize_records(const Design& design);
std::vector<SynthesisRecord> parse_records(const std::string& csv,
                                           const ConfigurationSpace& space);

// Loads and cross-validates a dataset directory. A missing manifest yields
// an empty dataset (with a note on stderr).
Dataset ingest(const std::string& root);
void save_dataset(const Dataset& dataset, const std::string& root);

// --- synthetic oracle -------------------------------------------------

// Parameters of the analytic cost generator. The formulas are documented
// in docs/formats.md and implemented in synthetic_cost().
struct SyntheticDesignSpec {
    std::uint64_t seed = 0;
    double base_latency = 100.0;
    double work_scale = 1.0;     // scales per-loop elementary work
    double saturation = 64.0;    // parallelism cap
    double ff_base = 500.0;
    double ff_coeff = 10.0;
    double lut_base = 900.0;
    double lut_coeff = 18.0;
    double dsp_coeff = 1.0;
    double noise = 0.0;
};

class SyntheticOracle {
public:
    SyntheticOracle(SyntheticDesignSpec spec, const MiniAst& ast, ConfigurationSpace space);

    SynthesisRecord query(const Configuration& config) const;
    const ConfigurationSpace& space() const { return space_; }

private:
    struct LoopStat {
        std::string label;
        double iters = 0;
        double ops = 0;    // per-iteration elementary ops excl. nested loops
        double mults = 0;  // per-iteration multiplier count
        bool carried = false;
        std::vector<std::string> arrays;   // directly accessed
        std::vector<std::string> callees;  // direct call sites
        std::vector<double> callee_ops;
        std::vector<double> callee_mults;
    };
    SyntheticDesignSpec spec_;
    ConfigurationSpace space_;
    std::string design_id_;
    double top_ops_ = 0;
    std::vector<LoopStat> loops_;
};

// Full record set for every configuration of the space.
Design generate_synthetic(const SyntheticDesignSpec& spec, const std::string& source,
                          ConfigurationSpace space);

// Built-in kernel corpus for synthetic experiments.
std::vector<std::string> builtin_design_names();
Design make_builtin_design(const std::string& name, std::uint64_t seed);
Dataset generate_dataset(int n_designs, std::uint64_t seed);

}  // namespace hlsdse
