#include "hlsdse/directives.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace hlsdse {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr int kSchemaVersion = 1;
const std::vector<std::string> kInlineVocab = {"off", "on"};

double ln1p(double x) { return std::log1p(x); }

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

const char* to_string(DirectiveType dtype) {
    switch (dtype) {
        case DirectiveType::Resource: return "resource";
        case DirectiveType::PartitionType: return "partition_type";
        case DirectiveType::PartitionFactor: return "partition_factor";
        case DirectiveType::Unroll: return "unroll";
        case DirectiveType::Inline: return "inline";
    }
    return "?";
}

DirectiveType directive_type_from_string(const std::string& s) {
    if (s == "resource") return DirectiveType::Resource;
    if (s == "partition_type") return DirectiveType::PartitionType;
    if (s == "partition_factor") return DirectiveType::PartitionFactor;
    if (s == "unroll") return DirectiveType::Unroll;
    if (s == "inline") return DirectiveType::Inline;
    throw SchemaError("unknown directive type \"" + s + "\"");
}

int FeatureSchema::node_width() const {
    // kind one-hot + 10 attribute slots + categorical groups (+none) +
    // partition factor + unroll + inline flag
    return kNodeKindCount + 10 + (static_cast<int>(resource_vocab.size()) + 1) +
           (static_cast<int>(partition_type_vocab.size()) + 1) + 3;
}

std::uint64_t FeatureSchema::fingerprint() const { return fnv1a(serialize()); }

std::string FeatureSchema::serialize() const {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["resource_vocab"] = resource_vocab;
    j["partition_type_vocab"] = partition_type_vocab;
    return j.dump(2) + "\n";
}

FeatureSchema FeatureSchema::deserialize(const std::string& document) {
    ordered_json j;
    try {
        j = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("schema manifest is not valid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
        throw SchemaError("unsupported schema manifest version");
    FeatureSchema s;
    s.resource_vocab = j.at("resource_vocab").get<std::vector<std::string>>();
    s.partition_type_vocab = j.at("partition_type_vocab").get<std::vector<std::string>>();
    if (s.resource_vocab.empty() || s.partition_type_vocab.empty())
        throw SchemaError("schema vocabularies must be nonempty");
    return s;
}

long long ConfigurationSpace::size() const {
    if (directives.empty()) return 0;
    long long n = 1;
    for (const auto& d : directives) n *= d.value_count();
    return n;
}

std::vector<Configuration> enumerate(const ConfigurationSpace& space) {
    std::vector<Configuration> out;
    const long long n = space.size();
    out.reserve(static_cast<std::size_t>(std::max<long long>(n, 0)));
    for (long long i = 0; i < n; ++i) out.push_back(config_at(space, i));
    return out;
}

Configuration config_at(const ConfigurationSpace& space, long long index) {
    Configuration c(space.directives.size(), 0);
    for (int d = static_cast<int>(space.directives.size()) - 1; d >= 0; --d) {
        const long long m = space.directives[d].value_count();
        c[d] = static_cast<int>(index % m);
        index /= m;
    }
    return c;
}

long long config_index(const ConfigurationSpace& space, const Configuration& config) {
    long long idx = 0;
    for (std::size_t d = 0; d < space.directives.size(); ++d)
        idx = idx * space.directives[d].value_count() + config[d];
    return idx;
}

bool config_valid(const ConfigurationSpace& space, const Configuration& config) {
    if (config.size() != space.directives.size()) return false;
    for (std::size_t d = 0; d < config.size(); ++d)
        if (config[d] < 0 || config[d] >= space.directives[d].value_count()) return false;
    return true;
}

SpaceVectors space_vector(const ConfigurationSpace& space) {
    SpaceVectors out;
    for (int k = 0; k < kDirectiveTypeCount; ++k) {
        std::set<double> values;
        for (const auto& d : space.directives)
            if (static_cast<int>(d.dtype) == k)
                values.insert(d.values.begin(), d.values.end());
        if (values.empty()) continue;
        std::vector<double> v(values.begin(), values.end());
        out.s[k] = mean_of(v);
        out.s_prime[k] = median_of(v);
    }
    return out;
}

namespace {

// Chosen values grouped by dtype for one configuration.
std::array<std::vector<double>, 5> chosen_by_type(const ConfigurationSpace& space,
                                                  const Configuration& config) {
    std::array<std::vector<double>, 5> out;
    for (std::size_t d = 0; d < space.directives.size(); ++d) {
        const auto& dir = space.directives[d];
        out[static_cast<int>(dir.dtype)].push_back(dir.values[config[d]]);
    }
    return out;
}

}  // namespace

void compute_normalization(ConfigurationSpace& space) {
    for (int k = 0; k < kDirectiveTypeCount; ++k) {
        std::vector<const Directive*> dirs;
        for (const auto& d : space.directives)
            if (static_cast<int>(d.dtype) == k) dirs.push_back(&d);
        space.mean_diff_std[k] = 1.0;
        space.median_diff_std[k] = 1.0;
        if (dirs.empty()) continue;

        // Enumerate the sub-product over this dtype's directives; every
        // combination is equally likely under the Cartesian product.
        long long total = 1;
        for (const auto* d : dirs) total *= d->value_count();
        std::vector<double> means, medians;
        means.reserve(total);
        medians.reserve(total);
        for (long long i = 0; i < total; ++i) {
            long long rem = i;
            std::vector<double> chosen(dirs.size());
            for (int d = static_cast<int>(dirs.size()) - 1; d >= 0; --d) {
                const long long m = dirs[d]->value_count();
                chosen[d] = dirs[d]->values[rem % m];
                rem /= m;
            }
            means.push_back(mean_of(chosen));
            medians.push_back(median_of(chosen));
        }
        auto pop_std = [](const std::vector<double>& v) {
            const double m = mean_of(v);
            double acc = 0;
            for (double x : v) acc += (x - m) * (x - m);
            return std::sqrt(acc / static_cast<double>(v.size()));
        };
        const double s1 = pop_std(means);
        const double s2 = pop_std(medians);
        if (s1 > 0) space.mean_diff_std[k] = s1;
        if (s2 > 0) space.median_diff_std[k] = s2;
    }
    space.normalized = true;
}

GlobalAttrs global_attrs(const ConfigurationSpace& space, const Configuration& config,
                         std::int64_t instr_total, std::int64_t param_count) {
    if (!config_valid(space, config))
        throw std::invalid_argument("configuration does not belong to the space");
    if (!space.normalized)
        throw std::logic_error("configuration space is missing normalization constants");
    const SpaceVectors sv = space_vector(space);
    const auto chosen = chosen_by_type(space, config);
    GlobalAttrs g;
    g.u[0] = ln1p(static_cast<double>(instr_total));
    g.u[1] = ln1p(static_cast<double>(param_count));
    for (int k = 0; k < kDirectiveTypeCount; ++k) {
        const double c = mean_of(chosen[k]);
        const double c_prime = median_of(chosen[k]);
        g.u[2 + k] = (sv.s[k] - c) / space.mean_diff_std[k];
        g.u[7 + k] = (sv.s_prime[k] - c_prime) / space.median_diff_std[k];
    }
    return g;
}

namespace {

int vocab_index(const std::vector<std::string>& vocab, const std::string& value) {
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (vocab[i] == value) return static_cast<int>(i);
    return -1;
}

}  // namespace

EncodedGraph encode_features(const HcdfgGraph& graph, const ConfigurationSpace& space,
                             const Configuration& config, const FeatureSchema& schema) {
    if (!config_valid(space, config))
        throw std::invalid_argument("configuration does not belong to the space");
    const int n = static_cast<int>(graph.nodes.size());
    const int width = schema.node_width();
    const int res_n = static_cast<int>(schema.resource_vocab.size());
    const int pt_n = static_cast<int>(schema.partition_type_vocab.size());
    const int kAttr = kNodeKindCount;
    const int kRes = kAttr + 10;       // resource group (none slot first)
    const int kPt = kRes + res_n + 1;  // partition-type group (none slot first)
    const int kFactor = kPt + pt_n + 1;
    const int kUnroll = kFactor + 1;
    const int kInline = kUnroll + 1;

    EncodedGraph out;
    out.node_features = Eigen::MatrixXd::Zero(n, width);
    for (int i = 0; i < n; ++i) {
        const auto& a = graph.nodes[i].attrs;
        auto row = out.node_features.row(i);
        row[static_cast<int>(a.kind)] = 1.0;
        row[kAttr + 0] = ln1p(static_cast<double>(a.instr_count));
        row[kAttr + 1] = ln1p(static_cast<double>(a.trip_count));
        row[kAttr + 2] = a.loop_carried_dep ? 1.0 : 0.0;
        row[kAttr + 3] = ln1p(static_cast<double>(a.stride));
        row[kAttr + 4] = ln1p(static_cast<double>(a.callee_param_count));
        row[kAttr + 5] = ln1p(static_cast<double>(a.callee_invocations));
        row[kAttr + 6] = ln1p(static_cast<double>(a.callee_instr_count));
        row[kAttr + 7] = a.is_array_param ? 1.0 : 0.0;
        row[kAttr + 8] = ln1p(static_cast<double>(a.data_type_bytes));
        row[kAttr + 9] = ln1p(static_cast<double>(a.array_elements));
        row[kRes] = 1.0;  // "no directive" slots until a directive fills them
        row[kPt] = 1.0;
    }

    auto resolve = [&](const Directive& dir, NodeKind kind) {
        std::vector<int> rows;
        for (int i = 0; i < n; ++i)
            if (graph.nodes[i].attrs.kind == kind && graph.nodes[i].label == dir.target)
                rows.push_back(i);
        if (rows.empty())
            throw SchemaError("directive target \"" + dir.target + "\" (" +
                              to_string(dir.dtype) + ") does not resolve to a " +
                              to_string(kind) + " node in design \"" + graph.design_id + "\"");
        return rows;
    };

    for (std::size_t d = 0; d < space.directives.size(); ++d) {
        const auto& dir = space.directives[d];
        const double value = dir.values[config[d]];
        const std::string& raw = dir.raw_values[config[d]];
        switch (dir.dtype) {
            case DirectiveType::Resource:
                for (int i : resolve(dir, NodeKind::Param)) {
                    const int vi = vocab_index(schema.resource_vocab, raw);
                    if (vi < 0)
                        throw SchemaError("resource value \"" + raw + "\" not in vocabulary");
                    out.node_features(i, kRes) = 0.0;
                    out.node_features(i, kRes + 1 + vi) = 1.0;
                }
                break;
            case DirectiveType::PartitionType:
                for (int i : resolve(dir, NodeKind::Param)) {
                    const int vi = vocab_index(schema.partition_type_vocab, raw);
                    if (vi < 0)
                        throw SchemaError("partition type \"" + raw + "\" not in vocabulary");
                    out.node_features(i, kPt) = 0.0;
                    out.node_features(i, kPt + 1 + vi) = 1.0;
                }
                break;
            case DirectiveType::PartitionFactor:
                for (int i : resolve(dir, NodeKind::Param))
                    out.node_features(i, kFactor) = ln1p(value);
                break;
            case DirectiveType::Unroll:
                for (int i : resolve(dir, NodeKind::Loop))
                    out.node_features(i, kUnroll) = ln1p(value);
                break;
            case DirectiveType::Inline:
                for (int i : resolve(dir, NodeKind::Call))
                    out.node_features(i, kInline) = value;
                break;
        }
    }

    const int m = static_cast<int>(graph.edges.size());
    out.edge_features = Eigen::MatrixXd::Zero(m, kEdgeKindCount);
    out.edge_src.resize(m);
    out.edge_dst.resize(m);
    for (int e = 0; e < m; ++e) {
        out.edge_features(e, static_cast<int>(graph.edges[e].kind)) = 1.0;
        out.edge_src[e] = graph.node_index(graph.edges[e].src);
        out.edge_dst[e] = graph.node_index(graph.edges[e].dst);
    }

    const GlobalAttrs g =
        global_attrs(space, config, graph.globals.instr_total, graph.globals.param_count);
    out.global_features = Eigen::Map<const Eigen::VectorXd>(g.u.data(), 12);
    return out;
}

namespace {

void check_directive(const Directive& d) {
    if (d.values.empty()) throw SchemaError("directive value set must be nonempty");
    std::set<double> uniq(d.values.begin(), d.values.end());
    if (uniq.size() != d.values.size())
        throw SchemaError("directive value set has duplicates (target \"" + d.target + "\")");
    if (d.dtype == DirectiveType::PartitionFactor || d.dtype == DirectiveType::Unroll)
        for (double v : d.values)
            if (v <= 0 || v != std::floor(v))
                throw SchemaError(std::string(to_string(d.dtype)) +
                                  " values must be positive integers (target \"" + d.target +
                                  "\")");
}

}  // namespace

std::string serialize_space(const ConfigurationSpace& space) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["design_id"] = space.design_id;
    j["directives"] = ordered_json::array();
    for (const auto& d : space.directives) {
        ordered_json jd;
        jd["target"] = d.target;
        jd["dtype"] = to_string(d.dtype);
        ordered_json vals = ordered_json::array();
        if (d.dtype == DirectiveType::PartitionFactor || d.dtype == DirectiveType::Unroll)
            for (double v : d.values) vals.push_back(static_cast<long long>(v));
        else
            for (const auto& r : d.raw_values) vals.push_back(r);
        jd["values"] = vals;
        j["directives"].push_back(jd);
    }
    if (space.normalized) {
        j["normalization"] = {
            {"mean_diff_std", space.mean_diff_std},
            {"median_diff_std", space.median_diff_std},
        };
    }
    return j.dump(2) + "\n";
}

ConfigurationSpace deserialize_space(const std::string& document, const FeatureSchema& schema) {
    ordered_json j;
    try {
        j = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("space document is not valid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
        throw SchemaError("unsupported space schema_version");
    ConfigurationSpace space;
    space.design_id = j.at("design_id").get<std::string>();
    for (const auto& jd : j.at("directives")) {
        Directive d;
        d.target = jd.at("target").get<std::string>();
        d.dtype = directive_type_from_string(jd.at("dtype").get<std::string>());
        for (const auto& jv : jd.at("values")) {
            if (jv.is_number_integer()) {
                const long long v = jv.get<long long>();
                d.raw_values.push_back(std::to_string(v));
                d.values.push_back(static_cast<double>(v));
            } else if (jv.is_string()) {
                const std::string raw = jv.get<std::string>();
                int idx = -1;
                switch (d.dtype) {
                    case DirectiveType::Resource:
                        idx = vocab_index(schema.resource_vocab, raw);
                        break;
                    case DirectiveType::PartitionType:
                        idx = vocab_index(schema.partition_type_vocab, raw);
                        break;
                    case DirectiveType::Inline:
                        idx = vocab_index(kInlineVocab, raw);
                        break;
                    default:
                        throw SchemaError("directive \"" + d.target +
                                          "\": numeric dtype cannot take string value \"" + raw +
                                          "\"");
                }
                if (idx < 0)
                    throw SchemaError("directive \"" + d.target + "\": value \"" + raw +
                                      "\" not in vocabulary");
                d.raw_values.push_back(raw);
                d.values.push_back(static_cast<double>(idx));
            } else {
                throw SchemaError("directive values must be integers or strings");
            }
        }
        check_directive(d);
        space.directives.push_back(std::move(d));
    }
    if (space.directives.empty())
        throw SchemaError("space \"" + space.design_id + "\" has no directives");
    if (j.contains("normalization")) {
        const auto& jn = j["normalization"];
        auto m = jn.at("mean_diff_std").get<std::vector<double>>();
        auto md = jn.at("median_diff_std").get<std::vector<double>>();
        if (m.size() != 5 || md.size() != 5)
            throw SchemaError("normalization vectors must have 5 components");
        std::copy(m.begin(), m.end(), space.mean_diff_std.begin());
        std::copy(md.begin(), md.end(), space.median_diff_std.begin());
        space.normalized = true;
    } else {
        compute_normalization(space);
    }
    return space;
}

void save_space(const ConfigurationSpace& space, const std::string& path) {
    write_text_file(path, serialize_space(space));
}

ConfigurationSpace load_space(const std::string& path, const FeatureSchema& schema) {
    return deserialize_space(read_text_file(path), schema);
}

}  // namespace hlsdse
