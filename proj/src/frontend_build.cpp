// Block splitting, def-use analysis, and hybrid CDFG assembly.
//
// Lowering walks the AST once emitting a linear op stream with block
// boundaries at every load, store, call, and loop header. Loop bodies are
// re-walked (replay mode, no emission) until variable bindings reach a
// fixpoint, so uses that cross the back edge are observed. Dependence
// questions on array subscripts are answered with interval tests over
// affine forms of the enclosing loop counters; anything non-affine is
// treated as a may-dependence.
#include <algorithm>
#include <cassert>
#include <map>
#include <set>

#include "hlsdse/frontend.hpp"

namespace hlsdse {

namespace {

// --- affine index forms over loop variables ---

struct AffineForm {
    bool known = true;
    long long c0 = 0;
    std::map<std::string, long long> coeffs;

    static AffineForm unknown() {
        AffineForm f;
        f.known = false;
        return f;
    }
    static AffineForm constant(long long v) {
        AffineForm f;
        f.c0 = v;
        return f;
    }
    static AffineForm variable(const std::string& name) {
        AffineForm f;
        f.coeffs[name] = 1;
        return f;
    }

    bool is_const() const { return known && coeffs.empty(); }

    bool operator==(const AffineForm& o) const {
        if (known != o.known) return false;
        if (!known) return true;
        return c0 == o.c0 && coeffs == o.coeffs;
    }
};

AffineForm affine_add(const AffineForm& a, const AffineForm& b, long long sign) {
    if (!a.known || !b.known) return AffineForm::unknown();
    AffineForm r = a;
    r.c0 += sign * b.c0;
    for (const auto& [v, c] : b.coeffs) {
        r.coeffs[v] += sign * c;
        if (r.coeffs[v] == 0) r.coeffs.erase(v);
    }
    return r;
}

AffineForm affine_scale(const AffineForm& a, long long k) {
    if (!a.known) return AffineForm::unknown();
    if (k == 0) return AffineForm::constant(0);
    AffineForm r = a;
    r.c0 *= k;
    for (auto& [v, c] : r.coeffs) c *= k;
    return r;
}

AffineForm affine_combine(char op, const AffineForm& a, const AffineForm& b) {
    switch (op) {
        case '+': return affine_add(a, b, +1);
        case '-': return affine_add(a, b, -1);
        case '*':
            if (a.is_const()) return affine_scale(b, a.c0);
            if (b.is_const()) return affine_scale(a, b.c0);
            return AffineForm::unknown();
        default:
            return AffineForm::unknown();  // '/' and '%' break affinity
    }
}

// Keep only what both walks agree on.
AffineForm affine_meet(const AffineForm& a, const AffineForm& b) {
    return a == b ? a : AffineForm::unknown();
}

// --- lowered ops ---

enum class OpKind { Arith, Cmp, Index, Load, Store, CallOp };

struct LinOp {
    OpKind kind = OpKind::Arith;
    int block = -1;
    std::string mem_name;  // Load/Store
    std::string callee;    // CallOp
    bool derived = false;  // value transitively derives from a parameter
    bool store_value_derived = false;
    AffineForm index;                // Load/Store subscript
    std::vector<int> loop_stack;     // enclosing loops, outermost first
};

struct LoopRec {
    const ForLoop* src = nullptr;
    long long trip = 0;
    int block = -1;
    int depth = 0;
    // scalar recurrence accounting: first access direction per local
    std::map<std::string, bool> first_access_is_read;
    std::set<std::string> written;
};

struct BlockRec {
    NodeKind kind = NodeKind::Standard;
    std::int64_t instr_count = 0;
    std::set<int> successors;
    std::string label;
    std::string mem_name;
    std::string callee;
    int loop_index = -1;
    bool loop_carried = false;
};

struct Env {
    std::map<std::string, std::set<int>> defs;  // local -> defining op ids
    std::map<std::string, AffineForm> affine;   // local -> affine form, if tracked
};

bool merge_env(Env& into, const Env& from) {
    bool changed = false;
    for (const auto& [v, s] : from.defs) {
        auto& dst = into.defs[v];
        for (int d : s) changed |= dst.insert(d).second;
    }
    for (const auto& [v, f] : from.affine) {
        auto it = into.affine.find(v);
        if (it == into.affine.end()) {
            into.affine[v] = f;
            changed = true;
        } else {
            AffineForm met = affine_meet(it->second, f);
            if (!(met == it->second)) {
                it->second = met;
                changed = true;
            }
        }
    }
    // Variables bound in `into` but not in `from` lose their affine tracking.
    for (auto& [v, f] : into.affine) {
        if (f.known && !from.affine.count(v)) {
            f = AffineForm::unknown();
            changed = true;
        }
    }
    return changed;
}

// Forms that reference the loop variable describe the previous iteration
// when carried over the back edge; shift them by one stride.
Env shift_for_backedge(Env env, const std::string& var, long long step) {
    for (auto& [v, f] : env.affine) {
        auto it = f.coeffs.find(var);
        if (f.known && it != f.coeffs.end()) f.c0 -= it->second * step;
    }
    return env;
}

struct ExprVal {
    std::set<int> defs;
    bool derived = false;
    AffineForm affine = AffineForm::unknown();
};

class Lowerer {
public:
    Lowerer(const MiniAst& ast, const Function& fn) : ast_(ast), fn_(fn) {
        for (const auto& p : fn.params)
            (p.is_array ? array_params_ : scalar_params_).insert(p.name);
    }

    void run() {
        walk_stmts(fn_.body);
        flush_pending();
        if (blocks_.empty()) create_block(NodeKind::Standard);
        finish_dependences();
    }

    const std::vector<BlockRec>& blocks() const { return blocks_; }
    const std::vector<LinOp>& ops() const { return ops_; }
    const std::vector<LoopRec>& loops() const { return loops_; }
    int entry() const { return entry_; }

    // Deduplicated parameter-derived (def_block, use_block) pairs.
    std::vector<std::pair<int, int>> data_pairs() const {
        std::set<std::pair<int, int>> out;
        for (const auto& [def_op, use_op] : use_pairs_) {
            if (!ops_[def_op].derived) continue;
            int a = ops_[def_op].block;
            int b = ops_[use_op].block;
            if (a != b) out.insert({a, b});
        }
        for (const auto& p : memory_pairs_) out.insert(p);
        return {out.begin(), out.end()};
    }

    long long call_count(const std::string& callee) const {
        long long n = 0;
        for (const auto& op : ops_)
            if (op.kind == OpKind::CallOp && op.callee == callee) ++n;
        return n;
    }

private:
    // --- op emission / replay ---

    int next_op_index() const {
        return replay_ ? cursor_ : static_cast<int>(ops_.size());
    }

    int new_op(OpKind kind, int direct_block = -1) {
        if (replay_) {
            int id = cursor_++;
            if (ops_[id].kind != kind)
                throw std::logic_error("frontend lowering replay divergence");
            return id;
        }
        LinOp op;
        op.kind = kind;
        int id = static_cast<int>(ops_.size());
        ops_.push_back(std::move(op));
        if (direct_block >= 0) {
            ops_[id].block = direct_block;
            blocks_[direct_block].instr_count++;
        } else {
            pending_.push_back(id);
        }
        return id;
    }

    int create_block(NodeKind kind) {
        BlockRec b;
        b.kind = kind;
        int id = static_cast<int>(blocks_.size());
        blocks_.push_back(std::move(b));
        if (entry_ < 0) entry_ = id;
        for (int p : preds_) blocks_[p].successors.insert(id);
        preds_ = {id};
        return id;
    }

    void flush_pending() {
        if (replay_ || pending_.empty()) return;
        int b = create_block(NodeKind::Standard);
        for (int id : pending_) {
            ops_[id].block = b;
            blocks_[b].instr_count++;
        }
        pending_.clear();
    }

    void record_use(const std::set<int>& defs, int use_op) {
        for (int d : defs) use_pairs_.insert({d, use_op});
    }

    bool is_loop_var(const std::string& name) const {
        for (int li : loop_stack_)
            if (loops_[li].src->var == name) return true;
        return false;
    }

    void note_scalar_access(const std::string& var, bool is_read) {
        if (is_loop_var(var)) return;
        for (int li : loop_stack_) {
            auto& rec = loops_[li];
            if (rec.src->var == var) continue;
            rec.first_access_is_read.emplace(var, is_read);
            if (!is_read) rec.written.insert(var);
        }
    }

    // --- memory ops ---

    int emit_load(const std::string& name, const ExprVal& idx) {
        flush_pending();
        int lop;
        if (replay_) {
            lop = new_op(OpKind::Load);
            ops_[lop].index = affine_meet(ops_[lop].index, idx.affine);
        } else {
            int b = create_block(NodeKind::Read);
            blocks_[b].mem_name = name;
            lop = new_op(OpKind::Load, b);
            ops_[lop].mem_name = name;
            ops_[lop].index = idx.affine;
            ops_[lop].loop_stack = loop_stack_;
        }
        record_use(idx.defs, lop);
        ops_[lop].derived = true;
        return lop;
    }

    void emit_store(const std::string& name, const ExprVal& idx, const ExprVal& value) {
        flush_pending();
        int sop;
        if (replay_) {
            sop = new_op(OpKind::Store);
            ops_[sop].index = affine_meet(ops_[sop].index, idx.affine);
        } else {
            int b = create_block(NodeKind::Write);
            blocks_[b].mem_name = name;
            sop = new_op(OpKind::Store, b);
            ops_[sop].mem_name = name;
            ops_[sop].index = idx.affine;
            ops_[sop].loop_stack = loop_stack_;
        }
        record_use(idx.defs, sop);
        record_use(value.defs, sop);
        ops_[sop].store_value_derived |= value.derived;
    }

    // --- expressions ---

    ExprVal lower_expr(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::IntLit:
                return {{}, false, AffineForm::constant(e.value)};
            case Expr::Kind::VarRef: {
                if (scalar_params_.count(e.name)) {
                    ExprVal idx{{}, false, AffineForm::constant(0)};
                    int lop = emit_load(e.name, idx);
                    return {{lop}, true, AffineForm::unknown()};
                }
                note_scalar_access(e.name, true);
                ExprVal v;
                auto it = env_.defs.find(e.name);
                if (it != env_.defs.end()) v.defs = it->second;
                for (int d : v.defs) v.derived |= ops_[d].derived;
                if (is_loop_var(e.name)) {
                    v.affine = AffineForm::variable(e.name);
                } else {
                    auto af = env_.affine.find(e.name);
                    v.affine = af == env_.affine.end() ? AffineForm::unknown() : af->second;
                }
                return v;
            }
            case Expr::Kind::ArrayRef: {
                ExprVal idx = lower_expr(*e.kids[0]);
                int iop = new_op(OpKind::Index);
                record_use(idx.defs, iop);
                ops_[iop].derived |= idx.derived;
                int lop = emit_load(e.name, idx);
                return {{lop}, true, AffineForm::unknown()};
            }
            case Expr::Kind::Binary: {
                ExprVal l = lower_expr(*e.kids[0]);
                ExprVal r = lower_expr(*e.kids[1]);
                int aop = new_op(OpKind::Arith);
                record_use(l.defs, aop);
                record_use(r.defs, aop);
                ops_[aop].derived |= l.derived || r.derived;
                return {{aop}, ops_[aop].derived, affine_combine(e.op, l.affine, r.affine)};
            }
            case Expr::Kind::Call: {
                std::set<int> arg_defs;
                bool derived = false;
                for (const auto& arg : e.kids) {
                    ExprVal v = lower_expr(*arg);
                    arg_defs.insert(v.defs.begin(), v.defs.end());
                    derived |= v.derived;
                }
                flush_pending();
                int cop;
                if (replay_) {
                    cop = new_op(OpKind::CallOp);
                } else {
                    int b = create_block(NodeKind::Call);
                    blocks_[b].label = e.name;
                    blocks_[b].callee = e.name;
                    cop = new_op(OpKind::CallOp, b);
                    ops_[cop].callee = e.name;
                }
                record_use(arg_defs, cop);
                ops_[cop].derived |= derived;
                return {{cop}, ops_[cop].derived, AffineForm::unknown()};
            }
            case Expr::Kind::ArrayArg:
                return {{}, false, AffineForm::unknown()};
        }
        return {};
    }

    // --- statements ---

    void walk_stmts(const std::vector<Stmt>& stmts) {
        for (const auto& s : stmts) walk_stmt(s);
    }

    void walk_stmt(const Stmt& s) {
        switch (s.kind) {
            case Stmt::Kind::Decl: {
                if (s.value) {
                    ExprVal v = lower_expr(*s.value);
                    bind(s.target, v);
                } else {
                    env_.defs[s.target] = {};
                    env_.affine.erase(s.target);
                }
                break;
            }
            case Stmt::Kind::Assign: {
                ExprVal v = lower_expr(*s.value);
                if (s.index) {
                    ExprVal idx = lower_expr(*s.index);
                    int iop = new_op(OpKind::Index);
                    record_use(idx.defs, iop);
                    ops_[iop].derived |= idx.derived;
                    emit_store(s.target, idx, v);
                } else if (scalar_params_.count(s.target)) {
                    ExprVal idx{{}, false, AffineForm::constant(0)};
                    emit_store(s.target, idx, v);
                } else {
                    bind(s.target, v);
                }
                break;
            }
            case Stmt::Kind::CallStmt:
            case Stmt::Kind::Return: {
                if (s.value) lower_expr(*s.value);
                break;
            }
            case Stmt::Kind::For:
                lower_for(*s.loop);
                break;
        }
    }

    void bind(const std::string& var, const ExprVal& v) {
        note_scalar_access(var, false);
        env_.defs[var] = v.defs;
        if (v.affine.known)
            env_.affine[var] = v.affine;
        else
            env_.affine.erase(var);
    }

    void lower_for(const ForLoop& loop) {
        const long long trip = trip_count(loop);
        int loop_idx;
        if (!replay_) {
            flush_pending();
            loop_idx = static_cast<int>(loops_.size());
            LoopRec rec;
            rec.src = &loop;
            rec.trip = trip;
            rec.depth = static_cast<int>(loop_stack_.size());
            loops_.push_back(std::move(rec));
            int b = create_block(NodeKind::Loop);
            blocks_[b].label = loop.label;
            blocks_[b].loop_index = loop_idx;
            loops_[loop_idx].block = b;
            loop_cursor_ = static_cast<int>(loops_.size());
        } else {
            loop_idx = loop_cursor_++;
        }
        const int loop_block = loops_[loop_idx].block;
        new_op(OpKind::Cmp, replay_ ? -1 : loop_block);
        new_op(OpKind::Arith, replay_ ? -1 : loop_block);

        loop_stack_.push_back(loop_idx);
        Env env_entry = env_;
        env_entry.defs[loop.var] = {};
        env_entry.affine.erase(loop.var);

        const bool outer_replay = replay_;
        const int body_start_op = next_op_index();
        const int body_start_loop = replay_ ? loop_cursor_ : static_cast<int>(loops_.size());
        int body_end_op = -1;
        int body_end_loop = -1;
        Env env_after;
        for (int pass = 0; pass < 16; ++pass) {
            env_ = env_entry;
            if (pass > 0) {
                replay_ = true;
                cursor_ = body_start_op;
                loop_cursor_ = body_start_loop;
            }
            std::size_t uses_before = use_pairs_.size();
            long long derived_before = count_derived();
            walk_stmts(loop.body);
            if (pass == 0) {
                body_end_op = next_op_index();
                body_end_loop = replay_ ? loop_cursor_ : static_cast<int>(loops_.size());
            }
            env_after = env_;
            bool changed = merge_env(env_entry, shift_for_backedge(env_, loop.var, loop.step));
            changed |= use_pairs_.size() != uses_before;
            changed |= count_derived() != derived_before;
            if (!changed) break;
        }
        replay_ = outer_replay;
        if (replay_) {
            cursor_ = body_end_op;
            loop_cursor_ = body_end_loop;
        }

        loop_stack_.pop_back();
        env_ = env_entry;
        merge_env(env_, env_after);
        env_.defs[loop.var] = {};
        env_.affine[loop.var] = AffineForm::constant(loop.lo + trip * loop.step);

        if (!replay_) {
            flush_pending();
            for (int p : preds_) blocks_[p].successors.insert(loop_block);
            preds_ = {loop_block};
        }
    }

    long long count_derived() const {
        long long n = 0;
        for (const auto& op : ops_) n += op.derived + op.store_value_derived;
        return n;
    }

    // --- dependence analysis ---

    struct IterForm {
        bool known = true;
        long long c0 = 0;
        std::map<int, long long> loop_coeffs;  // LoopRec index -> coefficient
    };

    IterForm to_iteration_space(const LinOp& op) const {
        IterForm f;
        if (!op.index.known) {
            f.known = false;
            return f;
        }
        f.c0 = op.index.c0;
        for (const auto& [var, c] : op.index.coeffs) {
            int li = -1;
            for (int cand : op.loop_stack)
                if (loops_[cand].src->var == var) li = cand;
            if (li < 0) {
                f.known = false;
                return f;
            }
            f.loop_coeffs[li] += c * loops_[li].src->step;
            f.c0 += c * loops_[li].src->lo;
        }
        return f;
    }

    static void interval_add(long long& lo, long long& hi, long long coeff, long long steps) {
        // adds coeff * k for k in [0, steps]
        if (coeff >= 0) {
            lo += 0;
            hi += coeff * steps;
        } else {
            lo += coeff * steps;
            hi += 0;
        }
    }

    static bool exists_multiple_in(long long c, long long dlo, long long dhi,
                                   long long lo, long long hi) {
        // is there an integer d in [dlo, dhi] with c*d in [lo, hi]?
        if (dlo > dhi) return false;
        if (c == 0) return lo <= 0 && 0 <= hi;
        if (c < 0) {
            c = -c;
            std::swap(lo, hi);
            lo = -lo;
            hi = -hi;
        }
        auto ceil_div = [](long long a, long long b) {
            return a >= 0 ? (a + b - 1) / b : -((-a) / b);
        };
        auto floor_div = [](long long a, long long b) {
            return a >= 0 ? a / b : -((-a + b - 1) / b);
        };
        long long dmin = std::max(dlo, ceil_div(lo, c));
        long long dmax = std::min(dhi, floor_div(hi, c));
        return dmin <= dmax;
    }

    int common_prefix_len(const std::vector<int>& a, const std::vector<int>& b) const {
        int n = 0;
        while (n < static_cast<int>(a.size()) && n < static_cast<int>(b.size()) &&
               a[n] == b[n])
            ++n;
        return n;
    }

    // Can the store write the address the load reads, at iteration distance
    // d of `carrier` (d >= 1), or in the same iteration (carrier < 0)?
    bool may_alias(const LinOp& store, const LinOp& load, int carrier) const {
        if (store.mem_name != load.mem_name) return false;
        IterForm fs = to_iteration_space(store);
        IterForm fl = to_iteration_space(load);
        if (!fs.known || !fl.known) return true;

        const int shared = common_prefix_len(store.loop_stack, load.loop_stack);
        long long lo = fs.c0 - fl.c0;
        long long hi = lo;
        auto trip_span = [&](int li) { return std::max<long long>(0, loops_[li].trip - 1); };

        std::set<int> handled;
        for (int i = 0; i < shared; ++i) {
            int li = store.loop_stack[i];
            handled.insert(li);
            long long cs = fs.loop_coeffs.count(li) ? fs.loop_coeffs.at(li) : 0;
            long long cl = fl.loop_coeffs.count(li) ? fl.loop_coeffs.at(li) : 0;
            if (li == carrier) continue;  // handled via the distance variable
            interval_add(lo, hi, cs - cl, trip_span(li));
        }
        for (const auto& [li, c] : fs.loop_coeffs)
            if (!handled.count(li)) interval_add(lo, hi, c, trip_span(li));
        for (const auto& [li, c] : fl.loop_coeffs)
            if (!handled.count(li)) interval_add(lo, hi, -c, trip_span(li));

        if (carrier < 0) return lo <= 0 && 0 <= hi;

        long long cs = fs.loop_coeffs.count(carrier) ? fs.loop_coeffs.at(carrier) : 0;
        long long cl = fl.loop_coeffs.count(carrier) ? fl.loop_coeffs.at(carrier) : 0;
        // store at iteration k, load at k + d: cl*d = (cs-cl)*k + (address gap)
        interval_add(lo, hi, cs - cl, std::max<long long>(0, loops_[carrier].trip - 2));
        return exists_multiple_in(cl, 1, loops_[carrier].trip - 1, lo, hi);
    }

    void finish_dependences() {
        std::vector<int> mem_ops;
        for (int i = 0; i < static_cast<int>(ops_.size()); ++i)
            if (ops_[i].kind == OpKind::Load || ops_[i].kind == OpKind::Store)
                mem_ops.push_back(i);

        // loop-carried dependencies
        for (int li = 0; li < static_cast<int>(loops_.size()); ++li) {
            auto& rec = loops_[li];
            bool carried = false;
            if (rec.trip >= 2) {
                for (const auto& [var, is_read] : rec.first_access_is_read)
                    if (is_read && rec.written.count(var)) carried = true;
                for (int s : mem_ops) {
                    if (carried) break;
                    if (ops_[s].kind != OpKind::Store) continue;
                    if (std::find(ops_[s].loop_stack.begin(), ops_[s].loop_stack.end(), li) ==
                        ops_[s].loop_stack.end())
                        continue;
                    for (int l : mem_ops) {
                        if (ops_[l].kind != OpKind::Load) continue;
                        if (std::find(ops_[l].loop_stack.begin(), ops_[l].loop_stack.end(),
                                      li) == ops_[l].loop_stack.end())
                            continue;
                        if (may_alias(ops_[s], ops_[l], li)) {
                            carried = true;
                            break;
                        }
                    }
                }
            }
            rec.written.clear();
            blocks_[rec.block].loop_carried = carried;
        }

        // memory def-use pairs: a stored parameter-derived value reaching a load
        for (int s : mem_ops) {
            if (ops_[s].kind != OpKind::Store || !ops_[s].store_value_derived) continue;
            for (int l : mem_ops) {
                if (ops_[l].kind != OpKind::Load) continue;
                if (ops_[s].mem_name != ops_[l].mem_name) continue;
                bool reaches = false;
                if (s < l && may_alias(ops_[s], ops_[l], -1)) reaches = true;
                if (!reaches) {
                    const int shared = common_prefix_len(ops_[s].loop_stack, ops_[l].loop_stack);
                    for (int i = 0; i < shared && !reaches; ++i)
                        if (loops_[ops_[s].loop_stack[i]].trip >= 2 &&
                            may_alias(ops_[s], ops_[l], ops_[s].loop_stack[i]))
                            reaches = true;
                }
                if (reaches && ops_[s].block != ops_[l].block)
                    memory_pairs_.insert({ops_[s].block, ops_[l].block});
            }
        }
    }

    const MiniAst& ast_;
    const Function& fn_;
    std::set<std::string> scalar_params_;
    std::set<std::string> array_params_;

    std::vector<LinOp> ops_;
    std::vector<BlockRec> blocks_;
    std::vector<LoopRec> loops_;
    std::vector<int> pending_;
    std::vector<int> preds_;
    std::vector<int> loop_stack_;
    int entry_ = -1;
    Env env_;
    std::set<std::pair<int, int>> use_pairs_;
    std::set<std::pair<int, int>> memory_pairs_;

    bool replay_ = false;
    int cursor_ = 0;
    int loop_cursor_ = 0;
};

const Function* find_function(const MiniAst& ast, const std::string& name) {
    for (const auto& fn : ast.functions)
        if (fn.name == name) return &fn;
    return nullptr;
}

}  // namespace

BasicBlockList build_cfg(const MiniAst& ast) {
    Lowerer lw(ast, ast.top());
    lw.run();
    BasicBlockList out;
    out.entry = lw.entry();
    for (const auto& b : lw.blocks()) {
        BasicBlock bb;
        bb.kind = b.kind;
        bb.instr_count = b.instr_count;
        bb.successors.assign(b.successors.begin(), b.successors.end());
        bb.label = b.label;
        bb.mem_name = b.mem_name;
        if (b.kind == NodeKind::Loop) {
            const auto& rec = lw.loops()[b.loop_index];
            bb.trip_count = rec.trip;
            bb.stride = rec.src->step;
            bb.loop_carried = b.loop_carried;
        }
        if (b.kind == NodeKind::Call) {
            const Function* callee = find_function(ast, b.callee);
            Lowerer cl(ast, *callee);
            cl.run();
            std::int64_t total = 0;
            for (const auto& cb : cl.blocks()) total += cb.instr_count;
            bb.callee_param_count = static_cast<std::int64_t>(callee->params.size());
            bb.callee_instr_count = total;
        }
        out.blocks.push_back(std::move(bb));
    }
    // callee_invocations counts call sites to the callee across all functions
    for (auto& bb : out.blocks) {
        if (bb.kind != NodeKind::Call) continue;
        long long n = 0;
        for (const auto& fn : ast.functions) {
            Lowerer fl(ast, fn);
            fl.run();
            n += fl.call_count(bb.label);
        }
        bb.callee_invocations = n;
    }
    return out;
}

std::vector<std::pair<int, int>> build_dfg(const MiniAst& ast) {
    Lowerer lw(ast, ast.top());
    lw.run();
    return lw.data_pairs();
}

HcdfgGraph build_hcdfg(const MiniAst& ast) {
    const Function& top = ast.top();
    BasicBlockList cfg = build_cfg(ast);
    std::vector<std::pair<int, int>> dfg = build_dfg(ast);

    HcdfgGraph g;
    g.design_id = top.name;
    const int n_blocks = static_cast<int>(cfg.blocks.size());
    for (int i = 0; i < n_blocks; ++i) {
        const auto& b = cfg.blocks[i];
        Node n;
        n.id = i;
        n.entry = i == cfg.entry;
        n.attrs.kind = b.kind;
        n.attrs.instr_count = b.instr_count;
        n.label = b.label;
        if (b.kind == NodeKind::Loop) {
            n.attrs.trip_count = b.trip_count;
            n.attrs.stride = b.stride;
            n.attrs.loop_carried_dep = b.loop_carried;
        }
        if (b.kind == NodeKind::Call) {
            n.attrs.callee_param_count = b.callee_param_count;
            n.attrs.callee_invocations = b.callee_invocations;
            n.attrs.callee_instr_count = b.callee_instr_count;
        }
        g.nodes.push_back(std::move(n));
        g.globals.instr_total += b.instr_count;
    }

    for (int i = 0; i < n_blocks; ++i)
        for (int s : cfg.blocks[i].successors)
            g.edges.push_back({i, s, EdgeKind::Control});
    for (const auto& [a, b] : dfg) g.edges.push_back({a, b, EdgeKind::Data});

    g.globals.param_count = static_cast<std::int64_t>(top.params.size());
    for (std::size_t p = 0; p < top.params.size(); ++p) {
        const auto& param = top.params[p];
        Node n;
        n.id = n_blocks + static_cast<std::int64_t>(p);
        n.attrs.kind = NodeKind::Param;
        n.label = param.name;
        n.attrs.is_array_param = param.is_array;
        n.attrs.data_type_bytes = byte_width(param.type);
        n.attrs.array_elements = param.is_array ? param.array_len : 0;
        bool used = false;
        for (int i = 0; i < n_blocks; ++i) {
            const auto& b = cfg.blocks[i];
            if ((b.kind == NodeKind::Read || b.kind == NodeKind::Write) &&
                b.mem_name == param.name) {
                g.edges.push_back({n.id, i, EdgeKind::ParamFlow});
                used = true;
            }
        }
        n.unused_param = !used;
        g.nodes.push_back(std::move(n));
    }
    return g;
}

HcdfgGraph extract_graph(const std::string& source) {
    return build_hcdfg(parse(source));
}

}  // namespace hlsdse
