// directives.hpp — synthesis directives, configuration spaces, and the
// numeric encoding of graphs + configurations into model features.
#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hlsdse/common.hpp"
#include "hlsdse/graph_ir.hpp"

namespace hlsdse {

enum class DirectiveType { Resource, PartitionType, PartitionFactor, Unroll, Inline };
inline constexpr int kDirectiveTypeCount = 5;

const char* to_string(DirectiveType dtype);
DirectiveType directive_type_from_string(const std::string& s);

// Vocabularies for categorical directive values. Loaded from a dataset
// manifest so checkpoints and data stay compatible; the fingerprint is
// embedded in checkpoints and verified at load.
struct FeatureSchema {
    std::vector<std::string> resource_vocab = {"ram_1p", "ram_2p"};
    std::vector<std::string> partition_type_vocab = {"block", "cyclic", "complete"};

    int node_width() const;
    static constexpr int edge_width() { return kEdgeKindCount; }
    static constexpr int global_width() { return 12; }
    std::uint64_t fingerprint() const;

    std::string serialize() const;
    static FeatureSchema deserialize(const std::string& document);

    bool operator==(const FeatureSchema&) const = default;
};

struct Directive {
    std::string target;  // node label (param name, loop label, callee name)
    DirectiveType dtype = DirectiveType::Unroll;
    std::vector<std::string> raw_values;  // as written in files
    std::vector<double> values;           // index-mapped categoricals / numeric values

    int value_count() const { return static_cast<int>(values.size()); }
};

struct ConfigurationSpace {
    std::string design_id;
    std::vector<Directive> directives;
    // Per-component population stds of (s - c) and (s' - c') across the
    // space; 1 where the component is degenerate. Stored with the dataset.
    std::array<double, 5> mean_diff_std{1, 1, 1, 1, 1};
    std::array<double, 5> median_diff_std{1, 1, 1, 1, 1};
    bool normalized = false;

    long long size() const;
};

// One chosen value-set index per directive, in directive order.
using Configuration = std::vector<int>;

std::vector<Configuration> enumerate(const ConfigurationSpace& space);
Configuration config_at(const ConfigurationSpace& space, long long index);
long long config_index(const ConfigurationSpace& space, const Configuration& config);
bool config_valid(const ConfigurationSpace& space, const Configuration& config);

// Per-dtype mean (s) and median (s') over the union of admissible values.
struct SpaceVectors {
    std::array<double, 5> s{};
    std::array<double, 5> s_prime{};
};
SpaceVectors space_vector(const ConfigurationSpace& space);

// Fills mean_diff_std / median_diff_std with exact population stds computed
// over the per-dtype sub-products of the space.
void compute_normalization(ConfigurationSpace& space);

struct GlobalAttrs {
    std::array<double, 12> u{};
};

// u = [ln(1+l), ln(1+p)] || (s-c)/std || (s'-c')/std'
GlobalAttrs global_attrs(const ConfigurationSpace& space, const Configuration& config,
                         std::int64_t instr_total, std::int64_t param_count);

struct EncodedGraph {
    Eigen::MatrixXd node_features;  // N x node_width
    Eigen::MatrixXd edge_features;  // E x 3
    Eigen::VectorXd global_features;  // 12
    std::vector<int> edge_src;  // node indices
    std::vector<int> edge_dst;
};

// Fixed-width numeric features per the layout in docs/formats.md. Throws
// SchemaError when a directive target does not resolve to a node of the
// right kind.
EncodedGraph encode_features(const HcdfgGraph& graph, const ConfigurationSpace& space,
                             const Configuration& config, const FeatureSchema& schema);

std::string serialize_space(const ConfigurationSpace& space);
ConfigurationSpace deserialize_space(const std::string& document, const FeatureSchema& schema);
void save_space(const ConfigurationSpace& space, const std::string& path);
ConfigurationSpace load_space(const std::string& path, const FeatureSchema& schema);

}  // namespace hlsdse
