#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "hlsdse/frontend.hpp"
#include "hlsdse/graph_ir.hpp"

using namespace hlsdse;

namespace {

std::string fixture(const std::string& name) {
    return read_text_file(std::string(HLSDSE_TEST_DATA_DIR) + "/" + name);
}

std::vector<Edge> sorted_edges(std::vector<Edge> edges) {
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.kind, a.src, a.dst) < std::tie(b.kind, b.src, b.dst);
    });
    return edges;
}

// Independent AST-level counters used as oracles against the lowering.
struct AstCounts {
    long long ops = 0;     // elementary operations
    long long loads = 0;   // array reads + scalar parameter reads
    long long stores = 0;  // array writes + scalar parameter writes
    std::map<std::string, long long> access_sites;  // per parameter
};

void count_expr(const Expr& e, const std::set<std::string>& scalar_params, AstCounts& c) {
    switch (e.kind) {
        case Expr::Kind::IntLit:
        case Expr::Kind::ArrayArg:
            break;
        case Expr::Kind::VarRef:
            if (scalar_params.count(e.name)) {
                c.ops += 1;  // load
                c.loads += 1;
                c.access_sites[e.name] += 1;
            }
            break;
        case Expr::Kind::ArrayRef:
            count_expr(*e.kids[0], scalar_params, c);
            c.ops += 2;  // index + load
            c.loads += 1;
            c.access_sites[e.name] += 1;
            break;
        case Expr::Kind::Binary:
            count_expr(*e.kids[0], scalar_params, c);
            count_expr(*e.kids[1], scalar_params, c);
            c.ops += 1;
            break;
        case Expr::Kind::Call:
            for (const auto& k : e.kids) count_expr(*k, scalar_params, c);
            c.ops += 1;
            break;
    }
}

void count_stmts(const std::vector<Stmt>& stmts, const std::set<std::string>& scalar_params,
                 AstCounts& c) {
    for (const auto& s : stmts) {
        switch (s.kind) {
            case Stmt::Kind::Decl:
                if (s.value) count_expr(*s.value, scalar_params, c);
                break;
            case Stmt::Kind::Assign:
                count_expr(*s.value, scalar_params, c);
                if (s.index) {
                    count_expr(*s.index, scalar_params, c);
                    c.ops += 2;  // index + store
                    c.stores += 1;
                    c.access_sites[s.target] += 1;
                } else if (scalar_params.count(s.target)) {
                    c.ops += 1;  // store
                    c.stores += 1;
                    c.access_sites[s.target] += 1;
                }
                break;
            case Stmt::Kind::CallStmt:
            case Stmt::Kind::Return:
                if (s.value) count_expr(*s.value, scalar_params, c);
                break;
            case Stmt::Kind::For:
                c.ops += 2;  // compare + increment
                count_stmts(s.loop->body, scalar_params, c);
                break;
        }
    }
}

AstCounts count_function(const Function& fn) {
    std::set<std::string> scalar_params;
    for (const auto& p : fn.params)
        if (!p.is_array) scalar_params.insert(p.name);
    AstCounts c;
    count_stmts(fn.body, scalar_params, c);
    return c;
}

}  // namespace

TEST_CASE("parse: simple array increment loop") {
    MiniAst ast = parse("void f(int a[8]){ for(int i=0;i<8;i++) a[i]=a[i]+1; }");
    REQUIRE(ast.functions.size() == 1);
    const Function& f = ast.top();
    CHECK(f.name == "f");
    REQUIRE(f.params.size() == 1);
    CHECK(f.params[0].is_array);
    CHECK(f.params[0].array_len == 8);
    REQUIRE(f.body.size() == 1);
    REQUIRE(f.body[0].kind == Stmt::Kind::For);
    CHECK(trip_count(*f.body[0].loop) == 8);
}

TEST_CASE("parse: unsupported constructs are named") {
    CHECK_THROWS_AS(parse("void f(int n){ int p; p = malloc(n); }"), UnsupportedConstructError);
    CHECK_THROWS_AS(parse("void f(int n){ while(n) { n = n - 1; } }"), UnsupportedConstructError);
    CHECK_THROWS_AS(parse("void f(int a[4], int n){ for(int i=0;i<n;i++) a[i]=0; }"),
                    UnsupportedConstructError);
    CHECK_THROWS_AS(parse("void f(){ int a[4]; }"), UnsupportedConstructError);
}

TEST_CASE("parse: syntax errors carry position") {
    try {
        parse("void f() { int x\n x = 3; }");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse("void f(){ y = 1; }"), ParseError);
    CHECK_THROWS_AS(parse("void f(){ g(1); }"), ParseError);
}

TEST_CASE("parse: scan kernel shape") {
    MiniAst ast = parse(fixture("sum_scan.c"));
    REQUIRE(ast.functions.size() == 1);
    const Function& f = ast.top();
    CHECK(f.params.size() == 2);
    REQUIRE(f.body.size() == 4);
    CHECK(f.body[0].kind == Stmt::Kind::Decl);
    CHECK(f.body[1].kind == Stmt::Kind::Assign);
    CHECK(f.body[2].kind == Stmt::Kind::For);
    CHECK(f.body[3].kind == Stmt::Kind::Assign);
    CHECK(f.body[2].loop->label == "L1");
    CHECK(trip_count(*f.body[2].loop) == 128);
    REQUIRE(f.body[2].loop->body.size() == 2);
}

TEST_CASE("build_cfg: straight-line function is one standard block") {
    BasicBlockList cfg = build_cfg(parse("void f(){ int x; x = 1 + 2; }"));
    REQUIRE(cfg.blocks.size() == 1);
    CHECK(cfg.blocks[0].kind == NodeKind::Standard);
    CHECK(cfg.blocks[0].instr_count == 1);
    CHECK(cfg.entry == 0);
}

TEST_CASE("build_cfg: loop body splits at loads and stores") {
    BasicBlockList cfg = build_cfg(parse(fixture("copy_loop.c")));
    REQUIRE(cfg.blocks.size() == 5);
    CHECK(cfg.blocks[0].kind == NodeKind::Loop);
    CHECK(cfg.blocks[1].kind == NodeKind::Standard);
    CHECK(cfg.blocks[2].kind == NodeKind::Read);
    CHECK(cfg.blocks[3].kind == NodeKind::Standard);
    CHECK(cfg.blocks[4].kind == NodeKind::Write);
    CHECK(cfg.blocks[0].trip_count == 4);
    CHECK(cfg.blocks[0].stride == 1);
    // chain plus the back edge
    CHECK(cfg.blocks[0].successors == std::vector<int>{1});
    CHECK(cfg.blocks[4].successors == std::vector<int>{0});
}

TEST_CASE("build_cfg: loop-carried dependence detection") {
    BasicBlockList dep = build_cfg(parse(fixture("dep_loop.c")));
    REQUIRE(dep.blocks[0].kind == NodeKind::Loop);
    CHECK(dep.blocks[0].loop_carried);

    // same-iteration update is not carried
    BasicBlockList same = build_cfg(parse(
        "void f(int a[8]){ for(int i=0;i<8;i++) a[i]=a[i]+1; }"));
    CHECK_FALSE(same.blocks[0].loop_carried);

    // scalar accumulator is carried
    BasicBlockList acc = build_cfg(parse(
        "void f(int a[8], int out[1]){ int s; s=0;"
        " for(int i=0;i<8;i++) s = s + a[i]; out[0]=s; }"));
    CHECK(acc.blocks[0].loop_carried);

    // accumulator reset inside the outer loop kills the outer dependence
    BasicBlockList reset = build_cfg(parse(
        "void f(int a[8], int out[8]){"
        " for(int j=0;j<8;j++){ int s; s=0;"
        "   for(int i=0;i<8;i++){ s = s + a[i]; }"
        "   out[j]=s; } }"));
    REQUIRE(reset.blocks[0].kind == NodeKind::Loop);
    CHECK_FALSE(reset.blocks[0].loop_carried);
    REQUIRE(reset.blocks[1].kind == NodeKind::Loop);
    CHECK(reset.blocks[1].loop_carried);
}

TEST_CASE("build_dfg: def-use pairs for parameter-derived values") {
    auto pairs = build_dfg(parse(fixture("copy_loop.c")));
    CHECK(pairs == std::vector<std::pair<int, int>>{{2, 4}});

    // disjoint loops over disjoint params have no cross-loop pairs
    auto disjoint = build_dfg(parse(
        "void f(int a[4], int b[4]){"
        " L0: for(int i=0;i<4;i++){ a[i] = a[i] + 1; }"
        " L1: for(int j=0;j<4;j++){ b[j] = b[j] * 2; } }"));
    CHECK(disjoint == std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {7, 8}, {8, 9}});

    // temporaries keep the chain connected
    auto chain = build_dfg(parse(
        "void f(int a[4], int b[4]){ for(int i=0;i<4;i++){ int t; t = a[i]; b[i] = t*t; } }"));
    CHECK(chain == std::vector<std::pair<int, int>>{{2, 3}, {3, 4}});
}

TEST_CASE("build_hcdfg matches the committed reference graphs") {
    for (const char* name : {"copy_loop", "dep_loop", "call_case"}) {
        CAPTURE(name);
        HcdfgGraph got = extract_graph(fixture(std::string(name) + ".c"));
        HcdfgGraph want = deserialize(fixture("graph_" + std::string(name) + ".json"));
        CHECK(got.design_id == want.design_id);
        REQUIRE(got.nodes.size() == want.nodes.size());
        for (std::size_t i = 0; i < got.nodes.size(); ++i) {
            CAPTURE(i);
            CHECK(got.nodes[i] == want.nodes[i]);
        }
        CHECK(sorted_edges(got.edges) == sorted_edges(want.edges));
        CHECK(got.globals == want.globals);
    }
}

TEST_CASE("build_hcdfg: parameterless pure arithmetic") {
    HcdfgGraph g = extract_graph("void f(){ int x; x = 1 + 2 * 3; }");
    CHECK(g.globals.param_count == 0);
    for (const auto& n : g.nodes) CHECK(n.attrs.kind != NodeKind::Param);
    for (const auto& e : g.edges) CHECK(e.kind == EdgeKind::Control);
    CHECK(validate(g).empty());
}

TEST_CASE("frontend invariants hold on the toy corpus") {
    for (const char* name : {"copy_loop.c", "dep_loop.c", "call_case.c", "sum_scan.c"}) {
        CAPTURE(name);
        MiniAst ast = parse(fixture(name));
        AstCounts oracle = count_function(ast.top());
        HcdfgGraph g = build_hcdfg(ast);

        CHECK(validate(g).empty());

        long long reads = 0, writes = 0, instr_total = 0;
        for (const auto& n : g.nodes) {
            reads += n.attrs.kind == NodeKind::Read;
            writes += n.attrs.kind == NodeKind::Write;
            instr_total += n.attrs.instr_count;
        }
        CHECK(reads == oracle.loads);
        CHECK(writes == oracle.stores);
        CHECK(instr_total == oracle.ops);
        CHECK(g.globals.instr_total == oracle.ops);

        // param-flow out-degree equals the number of access sites
        for (const auto& n : g.nodes) {
            if (n.attrs.kind != NodeKind::Param) continue;
            long long degree = 0;
            for (const auto& e : g.edges)
                degree += e.kind == EdgeKind::ParamFlow && e.src == n.id;
            CHECK(degree == oracle.access_sites[n.label]);
        }
    }
}

TEST_CASE("unused parameters stay as flagged isolated nodes") {
    HcdfgGraph g = extract_graph("void f(int a[4], int dead){ for(int i=0;i<4;i++) a[i]=0; }");
    const Node* dead = g.find_label("dead");
    REQUIRE(dead != nullptr);
    CHECK(dead->unused_param);
    CHECK(validate(g).empty());
}
