#include <algorithm>
#include <random>

#include "doctest.h"
#include "hlsdse/frontend.hpp"
#include "hlsdse/graph_ir.hpp"

using namespace hlsdse;

namespace {

Node make_block(std::int64_t id, NodeKind kind, std::int64_t instrs, bool entry = false) {
    Node n;
    n.id = id;
    n.entry = entry;
    n.attrs.kind = kind;
    n.attrs.instr_count = instrs;
    return n;
}

HcdfgGraph minimal_graph() {
    HcdfgGraph g;
    g.design_id = "minimal";
    g.nodes.push_back(make_block(0, NodeKind::Standard, 0, true));
    return g;
}

// Random graphs that satisfy every invariant by construction.
HcdfgGraph random_valid_graph(std::mt19937_64& rng) {
    auto randint = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    HcdfgGraph g;
    g.design_id = "rand" + std::to_string(randint(0, 999));
    const int n_blocks = randint(1, 12);
    for (int i = 0; i < n_blocks; ++i) {
        int pick = i == 0 ? 4 : randint(0, 4);
        NodeKind kind = std::array{NodeKind::Loop, NodeKind::Read, NodeKind::Write,
                                   NodeKind::Call, NodeKind::Standard}[pick];
        Node n = make_block(i, kind, 1, i == 0);
        switch (kind) {
            case NodeKind::Loop:
                n.attrs.instr_count = 2;
                n.attrs.trip_count = randint(1, 64);
                n.attrs.stride = randint(1, 4);
                n.attrs.loop_carried_dep = randint(0, 1) == 1;
                break;
            case NodeKind::Call:
                n.attrs.instr_count = 1;
                n.attrs.callee_param_count = randint(0, 4);
                n.attrs.callee_invocations = randint(1, 3);
                n.attrs.callee_instr_count = randint(1, 30);
                break;
            case NodeKind::Standard:
                n.attrs.instr_count = randint(0, 9);
                break;
            default:
                break;  // Read/Write keep instr_count 1
        }
        g.nodes.push_back(n);
        if (i > 0) g.edges.push_back({randint(0, i - 1), i, EdgeKind::Control});
    }
    for (int extra = randint(0, 3); extra > 0; --extra) {
        int a = randint(0, n_blocks - 1), b = randint(0, n_blocks - 1);
        g.edges.push_back({a, b, EdgeKind::Control});
    }
    for (int extra = randint(0, 4); extra > 0; --extra) {
        int a = randint(0, n_blocks - 1), b = randint(0, n_blocks - 1);
        if (a != b) g.edges.push_back({a, b, EdgeKind::Data});
    }
    const int n_params = randint(0, 3);
    for (int p = 0; p < n_params; ++p) {
        Node n;
        n.id = n_blocks + p;
        n.attrs.kind = NodeKind::Param;
        n.label = "p" + std::to_string(p);
        n.attrs.is_array_param = randint(0, 1) == 1;
        n.attrs.data_type_bytes = std::array{1, 2, 4, 8}[randint(0, 3)];
        n.attrs.array_elements = n.attrs.is_array_param ? randint(1, 1024) : 0;
        std::vector<int> targets;
        for (int i = 0; i < n_blocks; ++i)
            if (g.nodes[i].attrs.kind == NodeKind::Read ||
                g.nodes[i].attrs.kind == NodeKind::Write)
                targets.push_back(i);
        if (!targets.empty() && randint(0, 3) > 0) {
            g.edges.push_back({n.id, targets[randint(0, (int)targets.size() - 1)],
                               EdgeKind::ParamFlow});
        } else {
            n.unused_param = true;
        }
        g.nodes.push_back(n);
    }
    // Deduplicate edges so the multiset is a set (files keep order anyway).
    std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.src, a.dst, a.kind) < std::tie(b.src, b.dst, b.kind);
    });
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    return g;
}

int count_kind(const HcdfgGraph& g, EdgeKind k) {
    int n = 0;
    for (const auto& e : g.edges) n += e.kind == k;
    return n;
}

}  // namespace

TEST_CASE("validate accepts the minimal single-node graph") {
    CHECK(validate(minimal_graph()).empty());
}

TEST_CASE("validate flags dangling edges") {
    HcdfgGraph g = minimal_graph();
    g.edges.push_back({0, 99, EdgeKind::Control});
    auto v = validate(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == "dangling edge");
}

TEST_CASE("validate flags control edges touching params") {
    HcdfgGraph g = minimal_graph();
    Node p;
    p.id = 1;
    p.attrs.kind = NodeKind::Param;
    p.attrs.data_type_bytes = 4;
    p.unused_param = true;
    g.nodes.push_back(p);
    g.edges.push_back({0, 1, EdgeKind::Control});
    auto v = validate(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == "control edge on param");
}

TEST_CASE("validate flags params without flow and wrong kind fields") {
    HcdfgGraph g = minimal_graph();
    Node p;
    p.id = 1;
    p.attrs.kind = NodeKind::Param;
    p.attrs.data_type_bytes = 4;
    g.nodes.push_back(p);  // no flow, not flagged unused
    auto v = validate(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == "param without flow");

    g.nodes[1].unused_param = true;
    g.nodes[0].attrs.trip_count = 5;  // loop field on a standard node
    v = validate(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == "attribute outside kind group");
}

TEST_CASE("ablate_edges filters exactly the requested kinds") {
    std::mt19937_64 rng(7);
    HcdfgGraph g;
    g.design_id = "ablate";
    for (int i = 0; i < 5; ++i)
        g.nodes.push_back(make_block(i, i == 2 ? NodeKind::Read : (i == 3 ? NodeKind::Write : NodeKind::Standard),
                                     i == 2 || i == 3 ? 1 : 0, i == 0));
    for (int i = 0; i + 1 < 5; ++i) g.edges.push_back({i, i + 1, EdgeKind::Control});
    g.edges.push_back({2, 3, EdgeKind::Data});
    g.edges.push_back({2, 4, EdgeKind::Data});
    Node p;
    p.id = 5;
    p.attrs.kind = NodeKind::Param;
    p.attrs.data_type_bytes = 4;
    g.nodes.push_back(p);
    g.edges.push_back({5, 2, EdgeKind::ParamFlow});
    g.edges.push_back({5, 3, EdgeKind::ParamFlow});
    g.edges.push_back({0, 0, EdgeKind::Control});  // 5 control total
    REQUIRE(count_kind(g, EdgeKind::Control) == 5);

    auto no_data = ablate_edges(g, {EdgeKind::Data});
    CHECK(count_kind(no_data, EdgeKind::Control) == 5);
    CHECK(count_kind(no_data, EdgeKind::Data) == 0);
    CHECK(count_kind(no_data, EdgeKind::ParamFlow) == 2);
    CHECK(no_data.nodes == g.nodes);

    CHECK(ablate_edges(g, {}) == g);

    auto only_control = ablate_edges(g, {EdgeKind::Data, EdgeKind::ParamFlow});
    CHECK(only_control.edges.size() == 5);

    CHECK_THROWS_AS(ablate_edges(g, {EdgeKind::Control}), std::invalid_argument);

    // idempotence and commutation across disjoint kind sets
    for (int i = 0; i < 20; ++i) {
        HcdfgGraph r = random_valid_graph(rng);
        auto once = ablate_edges(r, {EdgeKind::Data});
        CHECK(ablate_edges(once, {EdgeKind::Data}) == once);
        auto ab = ablate_edges(ablate_edges(r, {EdgeKind::Data}), {EdgeKind::ParamFlow});
        auto ba = ablate_edges(ablate_edges(r, {EdgeKind::ParamFlow}), {EdgeKind::Data});
        CHECK(ab == ba);
        CHECK(ab == ablate_edges(r, {EdgeKind::Data, EdgeKind::ParamFlow}));
    }
}

TEST_CASE("serialize/deserialize round-trips valid graphs") {
    CHECK(deserialize(serialize(minimal_graph())) == minimal_graph());

    std::mt19937_64 rng(42);
    for (int i = 0; i < 100; ++i) {
        HcdfgGraph g = random_valid_graph(rng);
        REQUIRE(validate(g).empty());
        CHECK(deserialize(serialize(g)) == g);
    }
}

TEST_CASE("round-trip of the frontend toy graph") {
    const std::string src = read_text_file(std::string(HLSDSE_TEST_DATA_DIR) + "/sum_scan.c");
    HcdfgGraph g = extract_graph(src);
    REQUIRE(validate(g).empty());
    CHECK(deserialize(serialize(g)) == g);
}

TEST_CASE("deserialize rejects malformed documents") {
    CHECK_THROWS_AS(deserialize("not json"), SchemaError);
    CHECK_THROWS_AS(deserialize("{}"), SchemaError);

    std::string doc = serialize(minimal_graph());
    auto broken = doc;
    broken.replace(broken.find("standard"), 8, "alloc\"  ");
    CHECK_THROWS_AS(deserialize(broken), SchemaError);

    auto versioned = doc;
    versioned.replace(versioned.find("\"schema_version\": 1"), 19, "\"schema_version\": 9");
    CHECK_THROWS_AS(deserialize(versioned), SchemaError);

    // unknown fields are rejected
    auto extra = doc;
    extra.replace(extra.find("\"design_id\""), 11, "\"designid!\"");
    CHECK_THROWS_AS(deserialize(extra), SchemaError);
}
