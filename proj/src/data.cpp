#include "hlsdse/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hlsdse {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const Design* Dataset::find(const std::string& design_id) const {
    for (const auto& d : designs)
        if (d.id() == design_id) return &d;
    return nullptr;
}

std::size_t Dataset::total_records() const {
    std::size_t n = 0;
    for (const auto& d : designs) n += d.records.size();
    return n;
}

namespace {

std::string records_header(const ConfigurationSpace& space) {
    std::string h = "design_id";
    for (const auto& d : space.directives)
        h += "," + std::string(to_string(d.dtype)) + ":" + d.target;
    h += ",LAT,FF,LUT,DSP";
    return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string serialize_records(const Design& design) {
    std::string out = records_header(design.space) + "\n";
    for (const auto& r : design.records) {
        out += design.id();
        for (std::size_t d = 0; d < design.space.directives.size(); ++d)
            out += "," + design.space.directives[d].raw_values[r.config[d]];
        out += "," + format_double(r.lat);
        out += "," + std::to_string(r.ff);
        out += "," + std::to_string(r.lut);
        out += "," + std::to_string(r.dsp);
        out += "\n";
    }
    return out;
}

std::vector<SynthesisRecord> parse_records(const std::string& csv,
                                           const ConfigurationSpace& space) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("records file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string want = records_header(space);
    if (line != want)
        throw SchemaError("records header mismatch for design \"" + space.design_id +
                          "\": expected \"" + want + "\"");
    std::vector<SynthesisRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != space.directives.size() + 5)
            throw SchemaError("records line " + std::to_string(lineno) + ": wrong column count");
        SynthesisRecord r;
        r.design_id = cells[0];
        if (r.design_id != space.design_id)
            throw SchemaError("records line " + std::to_string(lineno) +
                              ": design_id does not match the space");
        for (std::size_t d = 0; d < space.directives.size(); ++d) {
            const auto& dir = space.directives[d];
            const std::string& cell = cells[1 + d];
            auto it = std::find(dir.raw_values.begin(), dir.raw_values.end(), cell);
            if (it == dir.raw_values.end())
                throw SchemaError("records line " + std::to_string(lineno) + ": value \"" +
                                  cell + "\" is outside the value set of " +
                                  to_string(dir.dtype) + ":" + dir.target);
            r.config.push_back(static_cast<int>(it - dir.raw_values.begin()));
        }
        const std::size_t base = 1 + space.directives.size();
        try {
            r.lat = std::stod(cells[base]);
            r.ff = std::stoll(cells[base + 1]);
            r.lut = std::stoll(cells[base + 2]);
            r.dsp = std::stoll(cells[base + 3]);
        } catch (const std::exception&) {
            throw SchemaError("records line " + std::to_string(lineno) + ": bad numeric value");
        }
        if (r.lat < 0 || r.ff < 0 || r.lut < 0 || r.dsp < 0)
            throw SchemaError("records line " + std::to_string(lineno) + ": negative outcome");
        out.push_back(std::move(r));
    }
    return out;
}

Dataset ingest(const std::string& root) {
    Dataset ds;
    const fs::path manifest = fs::path(root) / "manifest.json";
    if (!fs::exists(manifest)) {
        std::cerr << "note: no manifest at " << manifest.string()
                  << "; treating as an empty dataset\n";
        return ds;
    }
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(manifest.string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != 1)
        throw SchemaError("unsupported manifest schema_version");
    ds.schema = FeatureSchema::deserialize(j.at("feature_schema").dump());
    for (const auto& jname : j.at("designs")) {
        const std::string name = jname.get<std::string>();
        const fs::path dir = fs::path(root) / name;
        Design d;
        d.graph = load_graph((dir / "graph.json").string());
        d.space = load_space((dir / "space.json").string(), ds.schema);
        if (d.graph.design_id != name || d.space.design_id != name)
            throw SchemaError("design \"" + name + "\": inconsistent design_id across files");
        auto violations = validate(d.graph);
        if (!violations.empty())
            throw SchemaError("design \"" + name + "\": invalid graph (" + violations[0].rule +
                              " at " + violations[0].where + ")");
        d.records = parse_records(read_text_file((dir / "records.csv").string()), d.space);
        if (fs::exists(dir / "source.c")) d.source = read_text_file((dir / "source.c").string());
        ds.designs.push_back(std::move(d));
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::string& root) {
    fs::create_directories(root);
    ordered_json j;
    j["schema_version"] = 1;
    j["feature_schema"] = ordered_json::parse(dataset.schema.serialize());
    j["designs"] = ordered_json::array();
    for (const auto& d : dataset.designs) j["designs"].push_back(d.id());
    write_text_file((fs::path(root) / "manifest.json").string(), j.dump(2) + "\n");
    for (const auto& d : dataset.designs) {
        const fs::path dir = fs::path(root) / d.id();
        fs::create_directories(dir);
        save_graph(d.graph, (dir / "graph.json").string());
        save_space(d.space, (dir / "space.json").string());
        write_text_file((dir / "records.csv").string(), serialize_records(d));
        if (!d.source.empty()) write_text_file((dir / "source.c").string(), d.source);
    }
}

// --- synthetic oracle ---------------------------------------------------

namespace {

struct AstOpCount {
    double ops = 0;
    double mults = 0;
};

AstOpCount count_expr_ops(const Expr& e, const std::set<std::string>& scalar_params);

AstOpCount count_call(const Expr& call, const std::set<std::string>& scalar_params) {
    AstOpCount c;
    for (const auto& arg : call.kids) {
        AstOpCount a = count_expr_ops(*arg, scalar_params);
        c.ops += a.ops;
        c.mults += a.mults;
    }
    c.ops += 1;
    return c;
}

AstOpCount count_expr_ops(const Expr& e, const std::set<std::string>& scalar_params) {
    AstOpCount c;
    switch (e.kind) {
        case Expr::Kind::IntLit:
        case Expr::Kind::ArrayArg:
            break;
        case Expr::Kind::VarRef:
            if (scalar_params.count(e.name)) c.ops += 1;
            break;
        case Expr::Kind::ArrayRef: {
            AstOpCount a = count_expr_ops(*e.kids[0], scalar_params);
            c.ops += a.ops + 2;
            c.mults += a.mults;
            break;
        }
        case Expr::Kind::Binary: {
            AstOpCount l = count_expr_ops(*e.kids[0], scalar_params);
            AstOpCount r = count_expr_ops(*e.kids[1], scalar_params);
            c.ops += l.ops + r.ops + 1;
            c.mults += l.mults + r.mults + (e.op == '*' ? 1 : 0);
            break;
        }
        case Expr::Kind::Call: {
            AstOpCount a = count_call(e, scalar_params);
            c.ops += a.ops;
            c.mults += a.mults;
            break;
        }
    }
    return c;
}

// Dynamic (iteration-weighted) elementary work of a whole function.
AstOpCount dynamic_work(const MiniAst& ast, const Function& fn);

AstOpCount dynamic_work_stmts(const MiniAst& ast, const std::vector<Stmt>& stmts,
                              const std::set<std::string>& scalar_params) {
    AstOpCount total;
    for (const auto& s : stmts) {
        switch (s.kind) {
            case Stmt::Kind::For: {
                AstOpCount body = dynamic_work_stmts(ast, s.loop->body, scalar_params);
                const double trips = static_cast<double>(trip_count(*s.loop));
                total.ops += trips * (body.ops + 2);
                total.mults += trips * body.mults;
                break;
            }
            default: {
                AstOpCount c;
                if (s.value) c = count_expr_ops(*s.value, scalar_params);
                if (s.kind == Stmt::Kind::Assign) {
                    if (s.index) {
                        AstOpCount i = count_expr_ops(*s.index, scalar_params);
                        c.ops += i.ops + 2;
                        c.mults += i.mults;
                    } else if (scalar_params.count(s.target)) {
                        c.ops += 1;
                    }
                }
                total.ops += c.ops;
                total.mults += c.mults;
                // calls nested in expressions add the callee's dynamic work
                break;
            }
        }
    }
    return total;
}

AstOpCount dynamic_work(const MiniAst& ast, const Function& fn) {
    std::set<std::string> scalar_params;
    for (const auto& p : fn.params)
        if (!p.is_array) scalar_params.insert(p.name);
    return dynamic_work_stmts(ast, fn.body, scalar_params);
}

const Function& find_fn(const MiniAst& ast, const std::string& name) {
    for (const auto& f : ast.functions)
        if (f.name == name) return f;
    throw std::logic_error("unknown function " + name);
}

void collect_arrays(const Expr& e, std::set<std::string>& arrays) {
    if (e.kind == Expr::Kind::ArrayRef) arrays.insert(e.name);
    for (const auto& k : e.kids) collect_arrays(*k, arrays);
}

void collect_calls(const Expr& e, std::vector<const Expr*>& calls) {
    if (e.kind == Expr::Kind::Call) calls.push_back(&e);
    for (const auto& k : e.kids) collect_calls(*k, calls);
}

}  // namespace

SyntheticOracle::SyntheticOracle(SyntheticDesignSpec spec, const MiniAst& ast,
                                 ConfigurationSpace space)
    : spec_(spec), space_(std::move(space)) {
    if (!space_.normalized) compute_normalization(space_);
    const Function& top = ast.top();
    design_id_ = space_.design_id;
    std::set<std::string> scalar_params;
    for (const auto& p : top.params)
        if (!p.is_array) scalar_params.insert(p.name);

    int anon = 0;
    // Walk statements, keeping per-loop direct work (nested loops get their
    // own entry; their iterations already multiply through `iters`).
    std::function<void(const std::vector<Stmt>&, double, double*)> walk =
        [&](const std::vector<Stmt>& stmts, double outer_iters, double* direct_ops) {
            for (const auto& s : stmts) {
                if (s.kind == Stmt::Kind::For) {
                    LoopStat ls;
                    ls.label = s.loop->label.empty()
                                   ? "loop" + std::to_string(anon++)
                                   : s.loop->label;
                    const double trips = static_cast<double>(trip_count(*s.loop));
                    ls.iters = outer_iters * trips;
                    double body_direct = 2.0;  // header compare + increment
                    const std::size_t my_index = loops_.size();
                    loops_.push_back(ls);
                    walk(s.loop->body, ls.iters, &body_direct);
                    loops_[my_index].iters = ls.iters;
                    loops_[my_index].ops = body_direct;
                    // collect arrays, mults, and call sites directly in the body
                    std::set<std::string> arrays;
                    double mults = 0;
                    for (const auto& bs : s.loop->body) {
                        if (bs.kind == Stmt::Kind::For) continue;
                        std::vector<const Expr*> calls;
                        if (bs.value) {
                            collect_arrays(*bs.value, arrays);
                            collect_calls(*bs.value, calls);
                            mults += count_expr_ops(*bs.value, scalar_params).mults;
                        }
                        if (bs.kind == Stmt::Kind::Assign && bs.index) {
                            collect_arrays(*bs.index, arrays);
                            mults += count_expr_ops(*bs.index, scalar_params).mults;
                        }
                        for (const Expr* call : calls) {
                            const Function& callee = find_fn(ast, call->name);
                            AstOpCount work = dynamic_work(ast, callee);
                            loops_[my_index].callees.push_back(call->name);
                            loops_[my_index].callee_ops.push_back(work.ops);
                            loops_[my_index].callee_mults.push_back(work.mults);
                        }
                    }
                    loops_[my_index].arrays.assign(arrays.begin(), arrays.end());
                    loops_[my_index].mults = mults;
                } else {
                    AstOpCount c;
                    std::vector<const Expr*> calls;
                    if (s.value) {
                        c = count_expr_ops(*s.value, scalar_params);
                        collect_calls(*s.value, calls);
                    }
                    if (s.kind == Stmt::Kind::Assign) {
                        if (s.index) {
                            AstOpCount i = count_expr_ops(*s.index, scalar_params);
                            c.ops += i.ops + 2;
                        } else if (scalar_params.count(s.target)) {
                            c.ops += 1;
                        }
                    }
                    if (direct_ops) {
                        // callee work of in-loop call sites is added in
                        // query() where the inline choice is known
                        *direct_ops += c.ops;
                    } else {
                        // top-level call sites run once; charge callee work here
                        for (const Expr* call : calls)
                            c.ops += dynamic_work(ast, find_fn(ast, call->name)).ops;
                        top_ops_ += c.ops;
                    }
                }
            }
        };
    walk(top.body, 1.0, nullptr);

    // Loop-carried recurrences limit how far unrolling can go; flags come
    // from the frontend's dependence analysis, in loop emission order.
    BasicBlockList cfg = build_cfg(ast);
    std::size_t li = 0;
    for (const auto& b : cfg.blocks) {
        if (b.kind != NodeKind::Loop) continue;
        if (li < loops_.size()) loops_[li++].carried = b.loop_carried;
    }
}

SynthesisRecord SyntheticOracle::query(const Configuration& config) const {
    if (!config_valid(space_, config))
        throw std::invalid_argument("configuration outside the space");
    // chosen directive values by (dtype, target)
    auto chosen = [&](DirectiveType t, const std::string& target,
                      double fallback) -> double {
        for (std::size_t d = 0; d < space_.directives.size(); ++d) {
            const auto& dir = space_.directives[d];
            if (dir.dtype == t && dir.target == target) return dir.values[config[d]];
        }
        return fallback;
    };
    auto chosen_raw = [&](DirectiveType t, const std::string& target,
                          const std::string& fallback) -> std::string {
        for (std::size_t d = 0; d < space_.directives.size(); ++d) {
            const auto& dir = space_.directives[d];
            if (dir.dtype == t && dir.target == target) return dir.raw_values[config[d]];
        }
        return fallback;
    };

    auto array_parallelism = [&](const std::string& arr) {
        const double factor = chosen(DirectiveType::PartitionFactor, arr, 1.0);
        const double ports = chosen_raw(DirectiveType::Resource, arr, "ram_1p") == "ram_2p"
                                 ? 2.0
                                 : 1.0;
        return factor * ports;
    };

    double lat = spec_.base_latency + spec_.work_scale * top_ops_;
    double ff = spec_.ff_base;
    double lut = spec_.lut_base;
    double dsp = 0;
    for (const auto& ls : loops_) {
        const double unroll = chosen(DirectiveType::Unroll, ls.label, 1.0);
        double mem_par = std::numeric_limits<double>::infinity();
        double max_factor = 0;
        for (const auto& arr : ls.arrays) {
            const double par = array_parallelism(arr);
            mem_par = std::min(mem_par, par);
            max_factor = std::max(max_factor, par);
        }
        double ops = ls.ops;
        double mults = ls.mults;
        for (std::size_t c = 0; c < ls.callees.size(); ++c) {
            const bool inlined =
                chosen_raw(DirectiveType::Inline, ls.callees[c], "off") == "on";
            ops += ls.callee_ops[c] + (inlined ? 0.0 : 4.0);
            mults += ls.callee_mults[c];
        }
        double p = std::min(unroll, std::min(mem_par, spec_.saturation));
        if (ls.carried) p = std::min(p, 4.0);  // recurrence bounds the speedup
        p = std::max(1.0, p);
        lat += spec_.work_scale * ls.iters * ops / p;
        const double grow = unroll * (0.5 + std::log1p(max_factor));
        ff += spec_.ff_coeff * ops * grow / 8.0;
        lut += spec_.lut_coeff * ops * grow / 8.0;
        dsp += spec_.dsp_coeff * mults * unroll;
    }

    SynthesisRecord r;
    r.design_id = design_id_;
    r.config = config;
    if (spec_.noise > 0) {
        const long long idx = config_index(space_, config);
        auto eta = [&](const char* tag) {
            const std::uint64_t h =
                fnv1a(tag, fnv1a(std::to_string(idx), spec_.seed ^ 0x9e3779b97f4a7c15ULL));
            return (static_cast<double>(h >> 11) * 0x1.0p-53) * 2.0 - 1.0;
        };
        lat *= 1.0 + spec_.noise * eta("lat");
        ff *= 1.0 + spec_.noise * eta("ff");
        lut *= 1.0 + spec_.noise * eta("lut");
        dsp *= 1.0 + spec_.noise * eta("dsp");
    }
    r.lat = lat;
    r.ff = std::llround(ff);
    r.lut = std::llround(lut);
    r.dsp = std::llround(dsp);
    return r;
}

Design generate_synthetic(const SyntheticDesignSpec& spec, const std::string& source,
                          ConfigurationSpace space) {
    MiniAst ast = parse(source);
    if (!space.normalized) compute_normalization(space);
    Design d;
    d.graph = build_hcdfg(ast);
    d.graph.design_id = space.design_id;
    d.source = source;
    SyntheticOracle oracle(spec, ast, space);
    for (const auto& cfg : enumerate(space)) d.records.push_back(oracle.query(cfg));
    d.space = std::move(space);
    return d;
}

// --- built-in corpus ------------------------------------------------------

namespace {

struct KernelDef {
    const char* name;
    const char* source;
    // directive layout: built in make_space()
};

const KernelDef kKernels[] = {
    {"vec_scale",
     "void vec_scale(int a[256], int b[256], int k) {\n"
     "  L0: for (int i = 0; i < 256; i++) {\n"
     "    b[i] = a[i] * k;\n"
     "  }\n"
     "}\n"},
    {"vec_add",
     "void vec_add(int a[128], int b[128], int c[128]) {\n"
     "  L0: for (int i = 0; i < 128; i++) {\n"
     "    c[i] = a[i] + b[i];\n"
     "  }\n"
     "}\n"},
    {"dot",
     "void dot(int a[256], int b[256], int out[1]) {\n"
     "  int s;\n"
     "  s = 0;\n"
     "  L0: for (int i = 0; i < 256; i++) {\n"
     "    s = s + a[i] * b[i];\n"
     "  }\n"
     "  out[0] = s;\n"
     "}\n"},
    {"scan2",
     "void scan2(int bucket[128], int sums[16]) {\n"
     "  int s;\n"
     "  s = 0;\n"
     "  L0: for (int i = 0; i < 128; i++) {\n"
     "    s = s + bucket[i];\n"
     "    bucket[i] = s;\n"
     "  }\n"
     "  L1: for (int j = 0; j < 16; j++) {\n"
     "    sums[j] = bucket[j * 8 + 7];\n"
     "  }\n"
     "}\n"},
    {"mat_vec",
     "void mat_vec(int m[1024], int v[32], int out[32]) {\n"
     "  L0: for (int r = 0; r < 32; r++) {\n"
     "    int s;\n"
     "    s = 0;\n"
     "    L1: for (int c = 0; c < 32; c++) {\n"
     "      s = s + m[r * 32 + c] * v[c];\n"
     "    }\n"
     "    out[r] = s;\n"
     "  }\n"
     "}\n"},
    {"stencil",
     "void stencil(int a[128], int b[128]) {\n"
     "  L0: for (int i = 1; i < 127; i++) {\n"
     "    b[i] = a[i - 1] + a[i] + a[i + 1];\n"
     "  }\n"
     "}\n"},
    {"saxpy_call",
     "int mulacc(int x, int y, int s) {\n"
     "  return s + x * y;\n"
     "}\n"
     "\n"
     "void saxpy_call(int a[128], int b[128], int k) {\n"
     "  L0: for (int i = 0; i < 128; i++) {\n"
     "    b[i] = mulacc(a[i], k, b[i]);\n"
     "  }\n"
     "}\n"},
    {"gather",
     "void gather(int idx[64], int val[64], int out[64]) {\n"
     "  L0: for (int i = 0; i < 64; i++) {\n"
     "    int t;\n"
     "    t = idx[i] % 64;\n"
     "    out[i] = val[t] * 3;\n"
     "  }\n"
     "}\n"},
};

Directive dir_numeric(const std::string& target, DirectiveType t,
                      std::vector<long long> vals) {
    Directive d;
    d.target = target;
    d.dtype = t;
    for (long long v : vals) {
        d.raw_values.push_back(std::to_string(v));
        d.values.push_back(static_cast<double>(v));
    }
    return d;
}

Directive dir_cat(const std::string& target, DirectiveType t,
                  std::vector<std::string> vals, const FeatureSchema& schema) {
    Directive d;
    d.target = target;
    d.dtype = t;
    const std::vector<std::string>* vocab = nullptr;
    static const std::vector<std::string> inline_vocab = {"off", "on"};
    switch (t) {
        case DirectiveType::Resource: vocab = &schema.resource_vocab; break;
        case DirectiveType::PartitionType: vocab = &schema.partition_type_vocab; break;
        case DirectiveType::Inline: vocab = &inline_vocab; break;
        default: throw std::logic_error("categorical dtype expected");
    }
    for (const auto& v : vals) {
        auto it = std::find(vocab->begin(), vocab->end(), v);
        d.raw_values.push_back(v);
        d.values.push_back(static_cast<double>(it - vocab->begin()));
    }
    return d;
}

ConfigurationSpace make_space(const std::string& name, const FeatureSchema& schema) {
    ConfigurationSpace s;
    s.design_id = name;
    auto U = DirectiveType::Unroll;
    auto F = DirectiveType::PartitionFactor;
    auto P = DirectiveType::PartitionType;
    auto R = DirectiveType::Resource;
    auto I = DirectiveType::Inline;
    if (name == "vec_scale") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4, 8, 16, 32}));
        s.directives.push_back(dir_numeric("a", F, {1, 2, 4, 8, 16}));
        s.directives.push_back(dir_numeric("b", F, {1, 2, 4, 8, 16}));
        s.directives.push_back(dir_cat("a", P, {"block", "cyclic"}, schema));
        s.directives.push_back(dir_cat("a", R, {"ram_1p", "ram_2p"}, schema));
    } else if (name == "vec_add") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4, 8, 16}));
        s.directives.push_back(dir_numeric("a", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("b", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("c", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_cat("a", P, {"block", "cyclic"}, schema));
    } else if (name == "dot") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4, 8, 16, 32}));
        s.directives.push_back(dir_numeric("a", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("b", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_cat("a", P, {"block", "cyclic"}, schema));
        s.directives.push_back(dir_cat("b", P, {"block", "cyclic"}, schema));
    } else if (name == "scan2") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("L1", U, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("bucket", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("sums", F, {1, 2}));
        s.directives.push_back(dir_cat("bucket", P, {"block", "cyclic"}, schema));
        s.directives.push_back(dir_cat("bucket", R, {"ram_1p", "ram_2p"}, schema));
    } else if (name == "mat_vec") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4}));
        s.directives.push_back(dir_numeric("L1", U, {1, 2, 4, 8, 16, 32}));
        s.directives.push_back(dir_numeric("m", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("v", F, {1, 2, 4}));
        s.directives.push_back(dir_cat("m", P, {"block", "cyclic"}, schema));
    } else if (name == "stencil") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4, 8, 16, 32}));
        s.directives.push_back(dir_numeric("a", F, {1, 2, 4, 8, 16}));
        s.directives.push_back(dir_numeric("b", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_cat("a", P, {"block", "cyclic"}, schema));
        s.directives.push_back(dir_cat("a", R, {"ram_1p", "ram_2p"}, schema));
    } else if (name == "saxpy_call") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4, 8, 16}));
        s.directives.push_back(dir_numeric("a", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("b", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_cat("mulacc", I, {"off", "on"}, schema));
        s.directives.push_back(dir_cat("a", P, {"block", "cyclic"}, schema));
        s.directives.push_back(dir_cat("a", R, {"ram_1p", "ram_2p"}, schema));
    } else if (name == "gather") {
        s.directives.push_back(dir_numeric("L0", U, {1, 2, 4, 8, 16}));
        s.directives.push_back(dir_numeric("idx", F, {1, 2, 4}));
        s.directives.push_back(dir_numeric("val", F, {1, 2, 4, 8}));
        s.directives.push_back(dir_numeric("out", F, {1, 2, 4}));
        s.directives.push_back(dir_cat("val", P, {"block", "cyclic"}, schema));
    } else {
        throw std::invalid_argument("unknown builtin design \"" + name + "\"");
    }
    compute_normalization(s);
    return s;
}

}  // namespace

std::vector<std::string> builtin_design_names() {
    std::vector<std::string> out;
    for (const auto& k : kKernels) out.push_back(k.name);
    return out;
}

Design make_builtin_design(const std::string& name, std::uint64_t seed) {
    const KernelDef* def = nullptr;
    for (const auto& k : kKernels)
        if (name == k.name) def = &k;
    if (!def) throw std::invalid_argument("unknown builtin design \"" + name + "\"");
    FeatureSchema schema;
    ConfigurationSpace space = make_space(name, schema);

    std::mt19937_64 rng(seed ^ fnv1a(name));
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    SyntheticDesignSpec spec;
    spec.seed = seed ^ fnv1a(name);
    spec.base_latency = uniform(50, 150);
    spec.work_scale = uniform(0.5, 2.0);
    spec.saturation = std::array{16.0, 32.0, 64.0}[rng() % 3];
    spec.ff_base = uniform(300, 900);
    spec.ff_coeff = uniform(4, 12);
    spec.lut_base = uniform(500, 1500);
    spec.lut_coeff = uniform(8, 24);
    spec.dsp_coeff = uniform(1, 3);
    spec.noise = 0.0;
    return generate_synthetic(spec, def->source, std::move(space));
}

Dataset generate_dataset(int n_designs, std::uint64_t seed) {
    const auto names = builtin_design_names();
    if (n_designs < 1 || n_designs > static_cast<int>(names.size()))
        throw std::invalid_argument("n_designs must be between 1 and " +
                                    std::to_string(names.size()));
    Dataset ds;
    for (int i = 0; i < n_designs; ++i)
        ds.designs.push_back(make_builtin_design(names[i], seed));
    return ds;
}

}  // namespace hlsdse
