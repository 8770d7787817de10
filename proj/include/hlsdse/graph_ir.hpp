// graph_ir.hpp — hybrid control/data flow graph data model
//
// Nodes are taxonomy-typed basic blocks (Loop, Read, Write, Call, Standard)
// plus one Param node per function parameter. Edges carry one of three kinds:
// Control, Data, ParamFlow. Graphs are immutable value types; construction
// happens in the frontend or through deserialize().
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "hlsdse/common.hpp"

namespace hlsdse {

enum class NodeKind { Loop, Read, Write, Call, Standard, Param };
enum class EdgeKind { Control, Data, ParamFlow };

inline constexpr int kNodeKindCount = 6;
inline constexpr int kEdgeKindCount = 3;

const char* to_string(NodeKind kind);
const char* to_string(EdgeKind kind);
NodeKind node_kind_from_string(const std::string& s);
EdgeKind edge_kind_from_string(const std::string& s);

// Attribute block. Fields outside a node's kind-specific group stay
// zero/false; validate() enforces this.
struct NodeAttrs {
    NodeKind kind = NodeKind::Standard;
    std::int64_t instr_count = 0;  // all block kinds (Read/Write carry exactly 1)
    // Loop
    std::int64_t trip_count = 0;
    bool loop_carried_dep = false;
    std::int64_t stride = 0;
    // Call
    std::int64_t callee_param_count = 0;
    std::int64_t callee_invocations = 0;
    std::int64_t callee_instr_count = 0;
    // Param
    bool is_array_param = false;
    std::int64_t data_type_bytes = 0;
    std::int64_t array_elements = 0;  // 0 for scalar params

    bool operator==(const NodeAttrs&) const = default;
};

struct Node {
    std::int64_t id = 0;
    NodeAttrs attrs;
    // Directive-target name: parameter name, loop label, or callee name.
    std::string label;
    bool entry = false;
    bool unused_param = false;

    bool operator==(const Node&) const = default;
};

struct Edge {
    std::int64_t src = 0;
    std::int64_t dst = 0;
    EdgeKind kind = EdgeKind::Control;

    bool operator==(const Edge&) const = default;
};

// Configuration-independent global quantities persisted with the graph; the
// full global attribute vector is assembled per configuration in the
// directives module.
struct GraphGlobals {
    std::int64_t instr_total = 0;
    std::int64_t param_count = 0;

    bool operator==(const GraphGlobals&) const = default;
};

struct HcdfgGraph {
    std::string design_id;
    std::vector<Node> nodes;  // order is significant in files
    std::vector<Edge> edges;
    GraphGlobals globals;

    bool operator==(const HcdfgGraph&) const = default;

    // Index of the node with the given id, or -1.
    int node_index(std::int64_t id) const;
    const Node* find_node(std::int64_t id) const;
    const Node* find_label(const std::string& label) const;
};

struct Violation {
    std::string rule;    // short rule name, e.g. "dangling edge"
    std::string where;   // node/edge description
    std::string detail;
};

// Checks every structural invariant. Violations are data, not failures.
std::vector<Violation> validate(const HcdfgGraph& graph);

// Removes all edges whose kind is in `kinds`. Control edges are never
// ablated; passing Control throws std::invalid_argument.
HcdfgGraph ablate_edges(const HcdfgGraph& graph, const std::set<EdgeKind>& kinds);

// JSON document round-trip. deserialize throws SchemaError on malformed
// documents, unknown kinds/fields, or schema-version mismatch.
std::string serialize(const HcdfgGraph& graph);
HcdfgGraph deserialize(const std::string& document);

void save_graph(const HcdfgGraph& graph, const std::string& path);
HcdfgGraph load_graph(const std::string& path);

}  // namespace hlsdse
