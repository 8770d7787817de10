#include <cctype>
#include <map>
#include <set>

#include "hlsdse/frontend.hpp"

namespace hlsdse {

int byte_width(ScalarType type) {
    switch (type) {
        case ScalarType::Char: return 1;
        case ScalarType::Short: return 2;
        case ScalarType::Int: return 4;
        case ScalarType::Long: return 8;
        case ScalarType::Float: return 4;
        case ScalarType::Double: return 8;
        case ScalarType::Void: return 0;
    }
    return 0;
}

const char* to_string(ScalarType type) {
    switch (type) {
        case ScalarType::Void: return "void";
        case ScalarType::Char: return "char";
        case ScalarType::Short: return "short";
        case ScalarType::Int: return "int";
        case ScalarType::Long: return "long";
        case ScalarType::Float: return "float";
        case ScalarType::Double: return "double";
    }
    return "?";
}

namespace {

enum class Tok {
    End, Ident, IntLit,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Semi, Comma, Colon,
    Assign, Plus, Minus, Star, Slash, Percent,
    Lt, Le, Gt, Ge, PlusPlus, PlusAssign,
    KwVoid, KwChar, KwShort, KwInt, KwLong, KwFloat, KwDouble, KwFor, KwReturn,
};

struct Token {
    Tok tok = Tok::End;
    std::string text;
    long long value = 0;
    int line = 1;
    int col = 1;
};

// Recognized-but-rejected constructs get a dedicated error naming them.
const std::set<std::string> kUnsupportedKeywords = {
    "while", "do", "if", "else", "switch", "case", "break", "continue", "goto",
    "struct", "union", "enum", "typedef", "static", "unsigned", "signed",
    "malloc", "calloc", "realloc", "free", "sizeof", "alloca",
};

const std::map<std::string, Tok> kKeywords = {
    {"void", Tok::KwVoid},   {"char", Tok::KwChar},   {"short", Tok::KwShort},
    {"int", Tok::KwInt},     {"long", Tok::KwLong},   {"float", Tok::KwFloat},
    {"double", Tok::KwDouble}, {"for", Tok::KwFor},   {"return", Tok::KwReturn},
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws_and_comments();
        cur_ = Token{};
        cur_.line = line_;
        cur_.col = col_;
        if (pos_ >= src_.size()) {
            cur_.tok = Tok::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string ident;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ident.push_back(src_[pos_]);
                step();
            }
            if (kUnsupportedKeywords.count(ident))
                throw UnsupportedConstructError("unsupported construct \"" + ident + "\" at line " +
                                                std::to_string(cur_.line));
            auto kw = kKeywords.find(ident);
            cur_.tok = kw == kKeywords.end() ? Tok::Ident : kw->second;
            cur_.text = ident;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            long long v = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                v = v * 10 + (src_[pos_] - '0');
                step();
            }
            if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'f'))
                throw UnsupportedConstructError("unsupported construct \"floating literal\" at line " +
                                                std::to_string(cur_.line));
            cur_.tok = Tok::IntLit;
            cur_.value = v;
            return;
        }
        auto two = [&](char a, char b) {
            return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
        };
        if (two('+', '+')) { step(); step(); cur_.tok = Tok::PlusPlus; return; }
        if (two('+', '=')) { step(); step(); cur_.tok = Tok::PlusAssign; return; }
        if (two('<', '=')) { step(); step(); cur_.tok = Tok::Le; return; }
        if (two('>', '=')) { step(); step(); cur_.tok = Tok::Ge; return; }
        if (two('=', '=') || two('!', '=') || two('&', '&') || two('|', '|'))
            throw UnsupportedConstructError("unsupported construct \"" +
                                            src_.substr(pos_, 2) + "\" at line " +
                                            std::to_string(cur_.line));
        step();
        switch (c) {
            case '(': cur_.tok = Tok::LParen; return;
            case ')': cur_.tok = Tok::RParen; return;
            case '[': cur_.tok = Tok::LBracket; return;
            case ']': cur_.tok = Tok::RBracket; return;
            case '{': cur_.tok = Tok::LBrace; return;
            case '}': cur_.tok = Tok::RBrace; return;
            case ';': cur_.tok = Tok::Semi; return;
            case ',': cur_.tok = Tok::Comma; return;
            case ':': cur_.tok = Tok::Colon; return;
            case '=': cur_.tok = Tok::Assign; return;
            case '+': cur_.tok = Tok::Plus; return;
            case '-': cur_.tok = Tok::Minus; return;
            case '*': cur_.tok = Tok::Star; return;
            case '/': cur_.tok = Tok::Slash; return;
            case '%': cur_.tok = Tok::Percent; return;
            case '<': cur_.tok = Tok::Lt; return;
            case '>': cur_.tok = Tok::Gt; return;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", cur_.line, cur_.col);
        }
    }

    void skip_ws_and_comments() {
        for (;;) {
            while (pos_ < src_.size() &&
                   std::isspace(static_cast<unsigned char>(src_[pos_])))
                step();
            if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') step();
                continue;
            }
            if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '*') {
                step(); step();
                while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/'))
                    step();
                if (pos_ + 1 < src_.size()) { step(); step(); }
                continue;
            }
            if (pos_ < src_.size() && src_[pos_] == '#') {  // preprocessor lines are not supported
                throw UnsupportedConstructError("unsupported construct \"preprocessor directive\" at line " +
                                                std::to_string(line_));
            }
            return;
        }
    }

    void step() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token cur_;
};

struct Scope {
    std::set<std::string> scalars;      // locals + scalar params + loop vars
    std::set<std::string> arrays;       // array params
    std::set<std::string> loop_vars;    // currently active loop variables
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    MiniAst run() {
        MiniAst ast;
        while (lex_.peek().tok != Tok::End) ast.functions.push_back(parse_function(ast));
        if (ast.functions.empty())
            throw ParseError("no function definitions found", 1, 1);
        return ast;
    }

private:
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(msg, lex_.peek().line, lex_.peek().col);
    }

    Token expect(Tok tok, const char* what) {
        if (lex_.peek().tok != tok) fail(std::string("expected ") + what);
        return lex_.take();
    }

    bool accept(Tok tok) {
        if (lex_.peek().tok != tok) return false;
        lex_.take();
        return true;
    }

    ScalarType parse_type() {
        switch (lex_.take().tok) {
            case Tok::KwVoid: return ScalarType::Void;
            case Tok::KwChar: return ScalarType::Char;
            case Tok::KwShort: return ScalarType::Short;
            case Tok::KwInt: return ScalarType::Int;
            case Tok::KwLong: return ScalarType::Long;
            case Tok::KwFloat: return ScalarType::Float;
            case Tok::KwDouble: return ScalarType::Double;
            default: fail("expected a type name");
        }
    }

    bool at_type() const {
        switch (lex_.peek().tok) {
            case Tok::KwVoid: case Tok::KwChar: case Tok::KwShort: case Tok::KwInt:
            case Tok::KwLong: case Tok::KwFloat: case Tok::KwDouble:
                return true;
            default:
                return false;
        }
    }

    Function parse_function(const MiniAst& ast) {
        Function fn;
        fn.return_type = parse_type();
        fn.name = expect(Tok::Ident, "function name").text;
        for (const auto& prev : ast.functions)
            if (prev.name == fn.name) fail("duplicate function \"" + fn.name + "\"");
        expect(Tok::LParen, "'('");
        scope_ = Scope{};
        if (!accept(Tok::RParen)) {
            do {
                Param p;
                p.type = parse_type();
                if (p.type == ScalarType::Void) fail("parameters cannot be void");
                p.name = expect(Tok::Ident, "parameter name").text;
                if (scope_.scalars.count(p.name) || scope_.arrays.count(p.name))
                    fail("duplicate parameter \"" + p.name + "\"");
                if (accept(Tok::LBracket)) {
                    p.is_array = true;
                    p.array_len = expect(Tok::IntLit, "array length").value;
                    if (p.array_len <= 0) fail("array length must be positive");
                    expect(Tok::RBracket, "']'");
                    scope_.arrays.insert(p.name);
                } else {
                    scope_.scalars.insert(p.name);
                }
                fn.params.push_back(std::move(p));
            } while (accept(Tok::Comma));
            expect(Tok::RParen, "')'");
        }
        expect(Tok::LBrace, "'{'");
        functions_ = &ast;
        current_return_ = fn.return_type;
        fn.body = parse_stmt_list();
        expect(Tok::RBrace, "'}'");
        return fn;
    }

    std::vector<Stmt> parse_stmt_list() {
        std::vector<Stmt> out;
        while (lex_.peek().tok != Tok::RBrace && lex_.peek().tok != Tok::End) {
            if (!out.empty() && out.back().kind == Stmt::Kind::Return)
                fail("return must be the last statement");
            out.push_back(parse_stmt());
        }
        return out;
    }

    Stmt parse_stmt() {
        if (at_type()) return parse_decl();
        if (lex_.peek().tok == Tok::KwFor) return parse_for("");
        if (lex_.peek().tok == Tok::KwReturn) {
            lex_.take();
            Stmt s;
            s.kind = Stmt::Kind::Return;
            if (lex_.peek().tok != Tok::Semi) {
                if (current_return_ == ScalarType::Void)
                    fail("void function cannot return a value");
                s.value = parse_expr();
            } else if (current_return_ != ScalarType::Void) {
                fail("non-void function must return a value");
            }
            expect(Tok::Semi, "';'");
            return s;
        }
        Token name = expect(Tok::Ident, "statement");
        if (accept(Tok::Colon)) {
            if (lex_.peek().tok != Tok::KwFor) fail("label must precede a for loop");
            return parse_for(name.text);
        }
        if (lex_.peek().tok == Tok::LParen) {  // call statement
            Stmt s;
            s.kind = Stmt::Kind::CallStmt;
            s.value = parse_call(name.text);
            expect(Tok::Semi, "';'");
            return s;
        }
        // assignment
        Stmt s;
        s.kind = Stmt::Kind::Assign;
        s.target = name.text;
        if (accept(Tok::LBracket)) {
            if (!scope_.arrays.count(name.text))
                fail("\"" + name.text + "\" is not an array");
            s.index = parse_expr();
            expect(Tok::RBracket, "']'");
        } else {
            if (!scope_.scalars.count(name.text))
                fail("unresolved identifier \"" + name.text + "\"");
            if (scope_.loop_vars.count(name.text))
                throw UnsupportedConstructError(
                    "unsupported construct \"assignment to loop variable " + name.text + "\"");
        }
        expect(Tok::Assign, "'='");
        s.value = parse_expr();
        expect(Tok::Semi, "';'");
        return s;
    }

    Stmt parse_decl() {
        Stmt s;
        s.kind = Stmt::Kind::Decl;
        s.decl_type = parse_type();
        if (s.decl_type == ScalarType::Void) fail("cannot declare a void variable");
        s.target = expect(Tok::Ident, "variable name").text;
        if (scope_.scalars.count(s.target) || scope_.arrays.count(s.target))
            fail("duplicate declaration of \"" + s.target + "\"");
        if (lex_.peek().tok == Tok::LBracket)
            throw UnsupportedConstructError("unsupported construct \"local array\"");
        scope_.scalars.insert(s.target);
        if (accept(Tok::Assign)) s.value = parse_expr();
        expect(Tok::Semi, "';'");
        return s;
    }

    Stmt parse_for(const std::string& label) {
        expect(Tok::KwFor, "'for'");
        expect(Tok::LParen, "'('");
        auto loop = std::make_unique<ForLoop>();
        loop->label = label;
        bool fresh_var = false;
        if (at_type()) {
            ScalarType t = parse_type();
            if (t != ScalarType::Int && t != ScalarType::Long)
                fail("loop variable must be an integer");
            fresh_var = true;
        }
        loop->var = expect(Tok::Ident, "loop variable").text;
        if (fresh_var) {
            if (scope_.scalars.count(loop->var) || scope_.arrays.count(loop->var))
                fail("duplicate declaration of \"" + loop->var + "\"");
        } else if (!scope_.scalars.count(loop->var)) {
            fail("unresolved loop variable \"" + loop->var + "\"");
        }
        expect(Tok::Assign, "'='");
        loop->lo = parse_const_expr("loop bound");
        expect(Tok::Semi, "';'");
        Token cv = expect(Tok::Ident, "loop condition variable");
        if (cv.text != loop->var) fail("loop condition must test the loop variable");
        if (accept(Tok::Le)) loop->inclusive = true;
        else if (accept(Tok::Lt)) loop->inclusive = false;
        else throw UnsupportedConstructError("unsupported construct \"loop condition operator\"");
        loop->hi = parse_const_expr("loop bound");
        expect(Tok::Semi, "';'");
        Token iv = expect(Tok::Ident, "loop increment variable");
        if (iv.text != loop->var) fail("loop increment must update the loop variable");
        if (accept(Tok::PlusPlus)) {
            loop->step = 1;
        } else if (accept(Tok::PlusAssign)) {
            loop->step = parse_const_expr("loop stride");
        } else if (accept(Tok::Assign)) {
            Token lhs = expect(Tok::Ident, "loop increment expression");
            if (lhs.text != loop->var) fail("loop increment must be var = var + constant");
            expect(Tok::Plus, "'+'");
            loop->step = parse_const_expr("loop stride");
        } else {
            fail("expected loop increment");
        }
        if (loop->step <= 0)
            throw UnsupportedConstructError("unsupported construct \"non-positive loop stride\"");
        expect(Tok::RParen, "')'");

        bool var_added = !scope_.scalars.count(loop->var);
        scope_.scalars.insert(loop->var);
        bool was_loop_var = scope_.loop_vars.count(loop->var) > 0;
        scope_.loop_vars.insert(loop->var);
        if (accept(Tok::LBrace)) {
            loop->body = parse_stmt_list();
            expect(Tok::RBrace, "'}'");
        } else {
            loop->body.push_back(parse_stmt());
        }
        if (!was_loop_var) scope_.loop_vars.erase(loop->var);
        if (var_added && !fresh_var) scope_.scalars.erase(loop->var);
        for (const auto& st : loop->body)
            if (st.kind == Stmt::Kind::Return) fail("return inside a loop is not supported");

        Stmt s;
        s.kind = Stmt::Kind::For;
        s.loop = std::move(loop);
        return s;
    }

    long long parse_const_expr(const char* what) {
        ExprPtr e = parse_expr();
        long long v = 0;
        if (!fold_const(*e, v))
            throw UnsupportedConstructError(std::string("unsupported construct \"non-constant ") +
                                            what + "\"");
        return v;
    }

    static bool fold_const(const Expr& e, long long& out) {
        switch (e.kind) {
            case Expr::Kind::IntLit:
                out = e.value;
                return true;
            case Expr::Kind::Binary: {
                long long l = 0, r = 0;
                if (!fold_const(*e.kids[0], l) || !fold_const(*e.kids[1], r)) return false;
                switch (e.op) {
                    case '+': out = l + r; return true;
                    case '-': out = l - r; return true;
                    case '*': out = l * r; return true;
                    case '/': if (r == 0) return false; out = l / r; return true;
                    case '%': if (r == 0) return false; out = l % r; return true;
                }
                return false;
            }
            default:
                return false;
        }
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        while (lex_.peek().tok == Tok::Plus || lex_.peek().tok == Tok::Minus) {
            char op = lex_.take().tok == Tok::Plus ? '+' : '-';
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Binary;
            e->op = op;
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(parse_term());
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        for (;;) {
            char op = 0;
            switch (lex_.peek().tok) {
                case Tok::Star: op = '*'; break;
                case Tok::Slash: op = '/'; break;
                case Tok::Percent: op = '%'; break;
                default: return lhs;
            }
            lex_.take();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Binary;
            e->op = op;
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(parse_factor());
            lhs = std::move(e);
        }
    }

    ExprPtr parse_factor() {
        if (accept(Tok::Minus)) {
            ExprPtr inner = parse_factor();
            if (inner->kind == Expr::Kind::IntLit) {
                inner->value = -inner->value;
                return inner;
            }
            auto zero = std::make_unique<Expr>();
            zero->kind = Expr::Kind::IntLit;
            zero->value = 0;
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Binary;
            e->op = '-';
            e->kids.push_back(std::move(zero));
            e->kids.push_back(std::move(inner));
            return e;
        }
        if (lex_.peek().tok == Tok::IntLit) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::IntLit;
            e->value = lex_.take().value;
            return e;
        }
        if (accept(Tok::LParen)) {
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        Token name = expect(Tok::Ident, "expression");
        if (lex_.peek().tok == Tok::LParen) return parse_call(name.text);
        if (accept(Tok::LBracket)) {
            if (!scope_.arrays.count(name.text))
                fail("\"" + name.text + "\" is not an array");
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::ArrayRef;
            e->name = name.text;
            e->kids.push_back(parse_expr());
            expect(Tok::RBracket, "']'");
            return e;
        }
        if (scope_.arrays.count(name.text)) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::ArrayArg;
            e->name = name.text;
            return e;
        }
        if (!scope_.scalars.count(name.text))
            fail("unresolved identifier \"" + name.text + "\"");
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::VarRef;
        e->name = name.text;
        return e;
    }

    ExprPtr parse_call(const std::string& callee) {
        const Function* target = nullptr;
        for (const auto& fn : functions_->functions)
            if (fn.name == callee) target = &fn;
        if (!target) fail("call to undefined function \"" + callee + "\"");
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Call;
        e->name = callee;
        expect(Tok::LParen, "'('");
        if (!accept(Tok::RParen)) {
            do {
                e->kids.push_back(parse_expr());
            } while (accept(Tok::Comma));
            expect(Tok::RParen, "')'");
        }
        if (static_cast<long long>(e->kids.size()) !=
            static_cast<long long>(target->params.size()))
            fail("call to \"" + callee + "\" with wrong argument count");
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            const bool arg_is_array = e->kids[i]->kind == Expr::Kind::ArrayArg;
            if (arg_is_array != target->params[i].is_array)
                fail("argument " + std::to_string(i + 1) + " of \"" + callee +
                     "\" has mismatched array-ness");
        }
        return e;
    }

    Lexer lex_;
    Scope scope_;
    const MiniAst* functions_ = nullptr;
    ScalarType current_return_ = ScalarType::Void;
};

}  // namespace

MiniAst parse(const std::string& source) {
    Parser parser(source);
    return parser.run();
}

long long trip_count(const ForLoop& loop) {
    const long long span = loop.hi - loop.lo + (loop.inclusive ? 1 : 0);
    if (span <= 0) return 0;
    return (span + loop.step - 1) / loop.step;
}

}  // namespace hlsdse
