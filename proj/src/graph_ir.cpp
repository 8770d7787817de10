#include "hlsdse/graph_ir.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace hlsdse {

using ordered_json = nlohmann::ordered_json;

const char* to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Loop: return "loop";
        case NodeKind::Read: return "read";
        case NodeKind::Write: return "write";
        case NodeKind::Call: return "call";
        case NodeKind::Standard: return "standard";
        case NodeKind::Param: return "param";
    }
    return "?";
}

const char* to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::Control: return "control";
        case EdgeKind::Data: return "data";
        case EdgeKind::ParamFlow: return "param_flow";
    }
    return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
    if (s == "loop") return NodeKind::Loop;
    if (s == "read") return NodeKind::Read;
    if (s == "write") return NodeKind::Write;
    if (s == "call") return NodeKind::Call;
    if (s == "standard") return NodeKind::Standard;
    if (s == "param") return NodeKind::Param;
    throw SchemaError("unknown node kind \"" + s + "\"");
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "control") return EdgeKind::Control;
    if (s == "data") return EdgeKind::Data;
    if (s == "param_flow") return EdgeKind::ParamFlow;
    throw SchemaError("unknown edge kind \"" + s + "\"");
}

int HcdfgGraph::node_index(std::int64_t id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
}

const Node* HcdfgGraph::find_node(std::int64_t id) const {
    int i = node_index(id);
    return i < 0 ? nullptr : &nodes[i];
}

const Node* HcdfgGraph::find_label(const std::string& label) const {
    for (const auto& n : nodes)
        if (n.label == label) return &n;
    return nullptr;
}

namespace {

bool kind_fields_clean(const NodeAttrs& a) {
    const bool loop_clear = a.trip_count == 0 && !a.loop_carried_dep && a.stride == 0;
    const bool call_clear =
        a.callee_param_count == 0 && a.callee_invocations == 0 && a.callee_instr_count == 0;
    const bool param_clear =
        !a.is_array_param && a.data_type_bytes == 0 && a.array_elements == 0;
    switch (a.kind) {
        case NodeKind::Loop: return call_clear && param_clear;
        case NodeKind::Call: return loop_clear && param_clear;
        case NodeKind::Param: return loop_clear && call_clear && a.instr_count == 0;
        default: return loop_clear && call_clear && param_clear;
    }
}

}  // namespace

std::vector<Violation> validate(const HcdfgGraph& graph) {
    std::vector<Violation> out;
    auto report = [&](std::string rule, std::string where, std::string detail = "") {
        out.push_back({std::move(rule), std::move(where), std::move(detail)});
    };

    std::unordered_map<std::int64_t, const Node*> by_id;
    for (const auto& n : graph.nodes) {
        if (!by_id.emplace(n.id, &n).second)
            report("duplicate node id", "node " + std::to_string(n.id));
    }

    for (const auto& n : graph.nodes) {
        const std::string where = "node " + std::to_string(n.id);
        const auto& a = n.attrs;
        if (a.instr_count < 0 || a.trip_count < 0 || a.stride < 0 ||
            a.callee_param_count < 0 || a.callee_invocations < 0 ||
            a.callee_instr_count < 0 || a.array_elements < 0)
            report("negative attribute", where);
        if (!kind_fields_clean(a))
            report("attribute outside kind group", where,
                   std::string("kind ") + to_string(a.kind));
        if (a.kind == NodeKind::Read || a.kind == NodeKind::Write) {
            if (a.instr_count != 1)
                report("memory block must carry exactly one operation", where);
        }
        if (a.kind == NodeKind::Param) {
            if (a.data_type_bytes <= 0)
                report("param needs positive data type width", where);
            if (a.is_array_param != (a.array_elements > 0))
                report("array_elements must be positive iff array param", where);
            if (n.entry) report("param flagged as entry", where);
        } else if (n.unused_param) {
            report("unused flag on non-param node", where);
        }
    }

    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const auto& e = graph.edges[i];
        const std::string where = "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst);
        auto src = by_id.find(e.src);
        auto dst = by_id.find(e.dst);
        if (src == by_id.end() || dst == by_id.end()) {
            report("dangling edge", where);
            continue;
        }
        const NodeKind sk = src->second->attrs.kind;
        const NodeKind dk = dst->second->attrs.kind;
        if (e.kind == EdgeKind::Control &&
            (sk == NodeKind::Param || dk == NodeKind::Param))
            report("control edge on param", where);
        if (e.kind == EdgeKind::ParamFlow) {
            if (sk != NodeKind::Param)
                report("param_flow edge must start at a param node", where);
            if (dk != NodeKind::Read && dk != NodeKind::Write)
                report("param_flow edge must target a read or write block", where);
        }
    }

    // Connectivity of the control subgraph over non-param nodes.
    std::vector<const Node*> entries;
    std::size_t block_count = 0;
    for (const auto& n : graph.nodes) {
        if (n.attrs.kind == NodeKind::Param) continue;
        ++block_count;
        if (n.entry) entries.push_back(&n);
    }
    if (block_count > 0 && entries.size() != 1) {
        report("entry block", "graph",
               "expected exactly one entry block, found " + std::to_string(entries.size()));
    } else if (!entries.empty()) {
        std::unordered_map<std::int64_t, std::vector<std::int64_t>> succ;
        for (const auto& e : graph.edges)
            if (e.kind == EdgeKind::Control) succ[e.src].push_back(e.dst);
        std::unordered_set<std::int64_t> seen{entries[0]->id};
        std::queue<std::int64_t> q;
        q.push(entries[0]->id);
        while (!q.empty()) {
            auto cur = q.front();
            q.pop();
            for (auto nxt : succ[cur])
                if (seen.insert(nxt).second) q.push(nxt);
        }
        for (const auto& n : graph.nodes) {
            if (n.attrs.kind == NodeKind::Param) continue;
            if (!seen.count(n.id))
                report("unreachable block", "node " + std::to_string(n.id));
        }
    }

    // Param nodes need a param_flow edge or the unused flag.
    for (const auto& n : graph.nodes) {
        if (n.attrs.kind != NodeKind::Param) continue;
        bool has_flow = false;
        for (const auto& e : graph.edges) {
            if (e.kind != EdgeKind::ParamFlow || e.src != n.id) continue;
            const Node* dst = by_id.count(e.dst) ? by_id.at(e.dst) : nullptr;
            if (dst && (dst->attrs.kind == NodeKind::Read || dst->attrs.kind == NodeKind::Write)) {
                has_flow = true;
                break;
            }
        }
        if (!has_flow && !n.unused_param)
            report("param without flow", "node " + std::to_string(n.id),
                   "needs a param_flow edge to a read/write block or the unused flag");
    }

    return out;
}

HcdfgGraph ablate_edges(const HcdfgGraph& graph, const std::set<EdgeKind>& kinds) {
    if (kinds.count(EdgeKind::Control))
        throw std::invalid_argument("control edges cannot be ablated");
    HcdfgGraph out = graph;
    out.edges.clear();
    for (const auto& e : graph.edges)
        if (!kinds.count(e.kind)) out.edges.push_back(e);
    return out;
}

namespace {

constexpr int kSchemaVersion = 1;

ordered_json node_to_json(const Node& n) {
    ordered_json j;
    j["id"] = n.id;
    j["kind"] = to_string(n.attrs.kind);
    j["label"] = n.label;
    switch (n.attrs.kind) {
        case NodeKind::Param:
            j["is_array_param"] = n.attrs.is_array_param;
            j["data_type_bytes"] = n.attrs.data_type_bytes;
            j["array_elements"] = n.attrs.array_elements;
            j["unused"] = n.unused_param;
            break;
        case NodeKind::Loop:
            j["entry"] = n.entry;
            j["instr_count"] = n.attrs.instr_count;
            j["trip_count"] = n.attrs.trip_count;
            j["loop_carried_dep"] = n.attrs.loop_carried_dep;
            j["stride"] = n.attrs.stride;
            break;
        case NodeKind::Call:
            j["entry"] = n.entry;
            j["instr_count"] = n.attrs.instr_count;
            j["callee_param_count"] = n.attrs.callee_param_count;
            j["callee_invocations"] = n.attrs.callee_invocations;
            j["callee_instr_count"] = n.attrs.callee_instr_count;
            break;
        default:
            j["entry"] = n.entry;
            j["instr_count"] = n.attrs.instr_count;
            break;
    }
    return j;
}

std::int64_t get_int(const ordered_json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw SchemaError(where + ": missing field \"" + key + "\"");
    if (!j[key].is_number_integer())
        throw SchemaError(where + ": field \"" + key + "\" must be an integer");
    return j[key].get<std::int64_t>();
}

bool get_bool(const ordered_json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw SchemaError(where + ": missing field \"" + key + "\"");
    if (!j[key].is_boolean())
        throw SchemaError(where + ": field \"" + key + "\" must be a boolean");
    return j[key].get<bool>();
}

std::string get_string(const ordered_json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw SchemaError(where + ": missing field \"" + key + "\"");
    if (!j[key].is_string())
        throw SchemaError(where + ": field \"" + key + "\" must be a string");
    return j[key].get<std::string>();
}

void reject_unknown(const ordered_json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw SchemaError(where + ": unknown field \"" + it.key() + "\"");
    }
}

Node node_from_json(const ordered_json& j) {
    const std::string where = "node";
    Node n;
    n.id = get_int(j, "id", where);
    n.attrs.kind = node_kind_from_string(get_string(j, "kind", where));
    n.label = get_string(j, "label", where);
    switch (n.attrs.kind) {
        case NodeKind::Param:
            reject_unknown(j, {"id", "kind", "label", "is_array_param", "data_type_bytes",
                               "array_elements", "unused"}, where);
            n.attrs.is_array_param = get_bool(j, "is_array_param", where);
            n.attrs.data_type_bytes = get_int(j, "data_type_bytes", where);
            n.attrs.array_elements = get_int(j, "array_elements", where);
            n.unused_param = get_bool(j, "unused", where);
            break;
        case NodeKind::Loop:
            reject_unknown(j, {"id", "kind", "label", "entry", "instr_count", "trip_count",
                               "loop_carried_dep", "stride"}, where);
            n.entry = get_bool(j, "entry", where);
            n.attrs.instr_count = get_int(j, "instr_count", where);
            n.attrs.trip_count = get_int(j, "trip_count", where);
            n.attrs.loop_carried_dep = get_bool(j, "loop_carried_dep", where);
            n.attrs.stride = get_int(j, "stride", where);
            break;
        case NodeKind::Call:
            reject_unknown(j, {"id", "kind", "label", "entry", "instr_count",
                               "callee_param_count", "callee_invocations",
                               "callee_instr_count"}, where);
            n.entry = get_bool(j, "entry", where);
            n.attrs.instr_count = get_int(j, "instr_count", where);
            n.attrs.callee_param_count = get_int(j, "callee_param_count", where);
            n.attrs.callee_invocations = get_int(j, "callee_invocations", where);
            n.attrs.callee_instr_count = get_int(j, "callee_instr_count", where);
            break;
        default:
            reject_unknown(j, {"id", "kind", "label", "entry", "instr_count"}, where);
            n.entry = get_bool(j, "entry", where);
            n.attrs.instr_count = get_int(j, "instr_count", where);
            break;
    }
    return n;
}

}  // namespace

std::string serialize(const HcdfgGraph& graph) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["design_id"] = graph.design_id;
    j["nodes"] = ordered_json::array();
    for (const auto& n : graph.nodes) j["nodes"].push_back(node_to_json(n));
    j["edges"] = ordered_json::array();
    for (const auto& e : graph.edges) {
        ordered_json je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["kind"] = to_string(e.kind);
        j["edges"].push_back(je);
    }
    j["globals"] = {{"instr_total", graph.globals.instr_total},
                    {"param_count", graph.globals.param_count}};
    return j.dump(2) + "\n";
}

HcdfgGraph deserialize(const std::string& document) {
    ordered_json j;
    try {
        j = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("graph document is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("graph document must be a JSON object");
    reject_unknown(j, {"schema_version", "design_id", "nodes", "edges", "globals"}, "graph");
    if (get_int(j, "schema_version", "graph") != kSchemaVersion)
        throw SchemaError("unsupported graph schema_version");
    HcdfgGraph g;
    g.design_id = get_string(j, "design_id", "graph");
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw SchemaError("graph: \"nodes\" must be an array");
    if (!j.contains("edges") || !j["edges"].is_array())
        throw SchemaError("graph: \"edges\" must be an array");
    for (const auto& jn : j["nodes"]) g.nodes.push_back(node_from_json(jn));
    for (const auto& je : j["edges"]) {
        reject_unknown(je, {"src", "dst", "kind"}, "edge");
        Edge e;
        e.src = get_int(je, "src", "edge");
        e.dst = get_int(je, "dst", "edge");
        e.kind = edge_kind_from_string(get_string(je, "kind", "edge"));
        g.edges.push_back(e);
    }
    if (!j.contains("globals") || !j["globals"].is_object())
        throw SchemaError("graph: \"globals\" must be an object");
    reject_unknown(j["globals"], {"instr_total", "param_count"}, "globals");
    g.globals.instr_total = get_int(j["globals"], "instr_total", "globals");
    g.globals.param_count = get_int(j["globals"], "param_count", "globals");
    return g;
}

void save_graph(const HcdfgGraph& graph, const std::string& path) {
    write_text_file(path, serialize(graph));
}

HcdfgGraph load_graph(const std::string& path) {
    return deserialize(read_text_file(path));
}

}  // namespace hlsdse
