// frontend.hpp — mini-C parser and hybrid CDFG construction
//
// The accepted language is a small C subset: functions with scalar/array
// parameters, scalar locals, counted for-loops with constant bounds and
// stride, assignments over arithmetic expressions, array loads/stores, and
// calls to previously defined functions. See docs/minic.md for the grammar
// and the exact block-splitting and dependence rules.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hlsdse/graph_ir.hpp"

namespace hlsdse {

enum class ScalarType { Void, Char, Short, Int, Long, Float, Double };
int byte_width(ScalarType type);
const char* to_string(ScalarType type);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind { IntLit, VarRef, ArrayRef, Binary, Call, ArrayArg };
    Kind kind = Kind::IntLit;
    long long value = 0;      // IntLit
    std::string name;         // VarRef / ArrayRef / Call / ArrayArg
    char op = 0;              // Binary: + - * / %
    std::vector<ExprPtr> kids;  // Binary: [lhs, rhs]; ArrayRef: [index]; Call: args
};

struct Stmt;

struct ForLoop {
    std::string label;  // empty when the source has none
    std::string var;
    long long lo = 0;
    long long hi = 0;
    long long step = 1;
    bool inclusive = false;  // <= comparison
    std::vector<Stmt> body;
};

struct Stmt {
    enum class Kind { Decl, Assign, CallStmt, For, Return };
    Kind kind = Kind::Decl;
    ScalarType decl_type = ScalarType::Int;  // Decl
    std::string target;                      // Decl name / Assign lvalue name
    ExprPtr index;   // Assign to array element; null for scalar targets
    ExprPtr value;   // Decl init / Assign rhs / CallStmt expr / Return expr
    std::unique_ptr<ForLoop> loop;  // For
};

struct Param {
    std::string name;
    ScalarType type = ScalarType::Int;
    bool is_array = false;
    long long array_len = 0;  // elements; 0 for scalars
};

struct Function {
    std::string name;
    ScalarType return_type = ScalarType::Void;
    std::vector<Param> params;
    std::vector<Stmt> body;
};

// The last function is the design under analysis; earlier ones are helpers.
struct MiniAst {
    std::vector<Function> functions;
    const Function& top() const { return functions.back(); }
};

// Throws ParseError (with line/column) on syntax or resolution errors and
// UnsupportedConstructError on recognizable constructs outside the subset.
MiniAst parse(const std::string& source);

long long trip_count(const ForLoop& loop);

// Basic blocks refined by the block taxonomy: every load, store, call, and
// loop header starts its own block.
struct BasicBlock {
    NodeKind kind = NodeKind::Standard;
    std::int64_t instr_count = 0;
    std::vector<int> successors;  // block indices
    std::string label;            // loop label or callee name
    std::string mem_name;         // accessed parameter (Read/Write)
    std::int64_t trip_count = 0;  // Loop
    std::int64_t stride = 0;      // Loop
    bool loop_carried = false;    // Loop
    std::int64_t callee_param_count = 0;   // Call
    std::int64_t callee_invocations = 0;   // Call
    std::int64_t callee_instr_count = 0;   // Call
};

struct BasicBlockList {
    std::vector<BasicBlock> blocks;
    int entry = -1;
};

BasicBlockList build_cfg(const MiniAst& ast);

// Deduplicated (def_block, use_block) pairs for parameter-derived values,
// indices into build_cfg's block list.
std::vector<std::pair<int, int>> build_dfg(const MiniAst& ast);

HcdfgGraph build_hcdfg(const MiniAst& ast);

// parse + build_hcdfg
HcdfgGraph extract_graph(const std::string& source);

}  // namespace hlsdse
