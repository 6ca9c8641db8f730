#include "cao/frontend.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace cao {

namespace {

struct Token {
    enum class Kind { Ident, Int, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    Loc loc;
};

std::vector<Token> lex(const std::string& src, const std::string& file) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') adv(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            Loc start{line, col};
            adv(2);
            while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) adv(1);
            if (i + 1 >= src.size()) throw FrontendError({{file, start, "unterminated comment"}});
            adv(2);
            continue;
        }
        Token t;
        t.loc = {line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Token::Kind::Ident;
            t.text = src.substr(i, j - i);
            adv(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Token::Kind::Int;
            t.text = src.substr(i, j - i);
            adv(j - i);
        } else {
            static const char* two[] = {"&&", "||", "==", "!=", "<=", ">="};
            t.kind = Token::Kind::Punct;
            for (const char* op : two)
                if (src.compare(i, 2, op) == 0) t.text = op;
            if (t.text.empty()) {
                if (std::string("(){}<>;,.=!?+-*/").find(c) == std::string::npos)
                    throw FrontendError({{file, t.loc, std::string("unexpected character '") + c + "'"}});
                t.text = std::string(1, c);
            }
            adv(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.loc = {line, col};
    out.push_back(end);
    return out;
}

bool is_type_kw(const std::string& s) {
    return s == "Int" || s == "Rat" || s == "Bool" || s == "Unit" || s == "List" || s == "Fut";
}

const std::set<std::string> kKeywords = {"class", "main", "this", "if", "else", "while", "return", "skip", "new",
                                         "True", "False", "Nil", "Never", "unit", "Cons", "len", "hd", "tl"};

// get / get_3 and await / await_2
bool split_pp(const std::string& s, const std::string& base, int& pp) {
    if (s == base) {
        pp = -1;
        return true;
    }
    if (s.size() > base.size() + 1 && s.compare(0, base.size() + 1, base + "_") == 0) {
        std::string d = s.substr(base.size() + 1);
        for (char c : d)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        pp = std::stoi(d);
        return true;
    }
    return false;
}

class Parser {
public:
    Parser(std::vector<Token> toks, std::string file) : t_(std::move(toks)), file_(std::move(file)) {}

    Program program() {
        Program p;
        p.file = file_;
        while (is("class")) p.classes.push_back(class_decl());
        if (!is("main")) fail("expected 'class' or 'main'");
        p.main = main_block();
        if (peek().kind != Token::Kind::End) fail("unexpected input after main block");
        return p;
    }

private:
    std::vector<Token> t_;
    size_t pos_ = 0;
    std::string file_;

    const Token& peek(size_t k = 0) const { return t_[std::min(pos_ + k, t_.size() - 1)]; }
    bool is(const std::string& s, size_t k = 0) const {
        const Token& t = peek(k);
        return t.kind != Token::Kind::End && t.kind != Token::Kind::Int && t.text == s;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        std::string near = peek().kind == Token::Kind::End ? "end of input" : "'" + peek().text + "'";
        throw FrontendError({{file_, peek().loc, msg + " near " + near}});
    }
    Token next() { return t_[pos_ < t_.size() - 1 ? pos_++ : pos_]; }
    void expect(const std::string& s) {
        if (!is(s)) fail("expected '" + s + "'");
        next();
    }
    bool accept(const std::string& s) {
        if (is(s)) {
            next();
            return true;
        }
        return false;
    }
    std::string ident(const char* what) {
        if (peek().kind != Token::Kind::Ident || kKeywords.count(peek().text)) fail(std::string("expected ") + what);
        return next().text;
    }

    DataType type() {
        if (peek().kind != Token::Kind::Ident) fail("expected type");
        std::string n = next().text;
        if (n == "Int") return DataType::int_();
        if (n == "Rat") return DataType::rat();
        if (n == "Bool") return DataType::bool_();
        if (n == "Unit") return DataType::unit();
        if (n == "List" || n == "Fut") {
            expect("<");
            DataType e = type();
            expect(">");
            return n == "List" ? DataType::list(e) : DataType::fut(e);
        }
        if (kKeywords.count(n)) fail("expected type");
        return DataType::class_(n);
    }

    ClassDecl class_decl() {
        ClassDecl c;
        c.loc = peek().loc;
        expect("class");
        c.name = ident("class name");
        expect("(");
        if (!is(")")) {
            do {
                Param p;
                p.loc = peek().loc;
                p.type = type();
                p.name = ident("parameter name");
                c.params.push_back(p);
            } while (accept(","));
        }
        expect(")");
        expect("{");
        while (!is("}")) {
            if (peek().kind == Token::Kind::End) fail("unterminated class body");
            Loc l = peek().loc;
            DataType ty = type();
            std::string name = ident("member name");
            if (is("(")) {
                MethodDecl m;
                m.loc = l;
                m.ret = ty;
                m.name = name;
                m.cls = c.name;
                next();
                if (!is(")")) {
                    do {
                        Param p;
                        p.loc = peek().loc;
                        p.type = type();
                        p.name = ident("parameter name");
                        m.params.push_back(p);
                    } while (accept(","));
                }
                expect(")");
                m.body = block();
                c.methods.push_back(std::move(m));
            } else {
                FieldDecl f;
                f.loc = l;
                f.type = ty;
                f.name = name;
                if (accept("=")) f.init = expr();
                expect(";");
                c.fields.push_back(std::move(f));
            }
        }
        expect("}");
        return c;
    }

    MainBlock main_block() {
        MainBlock mb;
        mb.loc = peek().loc;
        expect("main");
        expect("{");
        bool have_call = false;
        while (!is("}")) {
            if (peek().kind == Token::Kind::End) fail("unterminated main block");
            if (have_call) fail("the initial call must be the last statement of main");
            Loc l = peek().loc;
            if (peek(1).kind == Token::Kind::Ident && !is("!", 1)) {
                Creation c;
                c.loc = l;
                c.cls = ident("class name");
                c.var = ident("object name");
                expect("=");
                accept("new");
                std::string cls2 = ident("class name");
                if (cls2 != c.cls) fail("creation type and class differ");
                expect("(");
                if (!is(")")) {
                    do c.args.push_back(ident("object name"));
                    while (accept(","));
                }
                expect(")");
                mb.creations.push_back(std::move(c));
            } else {
                mb.loc = l;
                mb.target = ident("object name");
                expect("!");
                mb.method = ident("method name");
                expect("(");
                if (!is(")")) {
                    do mb.args.push_back(expr());
                    while (accept(","));
                }
                expect(")");
                have_call = true;
            }
            accept(";");
        }
        expect("}");
        if (!have_call) fail("main block needs an initial call");
        return mb;
    }

    Block block() {
        expect("{");
        Block b;
        while (!is("}")) {
            if (peek().kind == Token::Kind::End) fail("unterminated block");
            b.push_back(stmt());
            while (accept(";")) {
            }
        }
        expect("}");
        return b;
    }

    bool at_decl() const {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident) return false;
        if (is_type_kw(t.text)) return true;
        return !kKeywords.count(t.text) && peek(1).kind == Token::Kind::Ident && !kKeywords.count(peek(1).text);
    }

    StmtPtr stmt() {
        auto s = std::make_shared<Stmt>();
        s->loc = peek().loc;
        int pp;
        if (accept("skip")) {
            s->kind = Stmt::Kind::Skip;
            return s;
        }
        if (accept("return")) {
            s->kind = Stmt::Kind::Return;
            s->expr = expr();
            return s;
        }
        if (accept("if")) {
            s->kind = Stmt::Kind::If;
            expect("(");
            s->expr = expr();
            expect(")");
            s->then_b = block();
            if (accept("else")) s->else_b = block();
            return s;
        }
        if (accept("while")) {
            s->kind = Stmt::Kind::While;
            expect("(");
            s->expr = expr();
            expect(")");
            s->body = block();
            return s;
        }
        if (peek().kind == Token::Kind::Ident && split_pp(peek().text, "await", pp)) {
            next();
            s->kind = Stmt::Kind::Await;
            s->pp = pp;
            s->pp_explicit = pp >= 0;
            s->expr = expr();
            s->await_future = accept("?");
            return s;
        }
        if (at_decl()) {
            s->is_decl = true;
            s->decl_type = type();
            s->var = ident("variable name");
            expect("=");
            rhs(*s);
            return s;
        }
        if (is("this") && is(".", 1) && is("=", 3)) {
            next();
            next();
            s->kind = Stmt::Kind::FieldAssign;
            s->field = ident("field name");
            expect("=");
            s->expr = expr();
            return s;
        }
        if (peek().kind == Token::Kind::Ident && is("=", 1)) {
            s->var = ident("variable name");
            expect("=");
            rhs(*s);
            return s;
        }
        // bare call
        ExprPtr e = expr();
        if (!is("!")) fail("expected statement");
        call_tail(*s, e);
        return s;
    }

    void call_tail(Stmt& s, const ExprPtr& target) {
        if (target->kind != Expr::Kind::Var && target->kind != Expr::Kind::Field) fail("call target must be a reference");
        expect("!");
        s.kind = Stmt::Kind::Call;
        s.target = target->name;
        s.method = ident("method name");
        expect("(");
        if (!is(")")) {
            do s.args.push_back(expr());
            while (accept(","));
        }
        expect(")");
    }

    void rhs(Stmt& s) {
        ExprPtr e = expr();
        int pp;
        if (is("!")) {
            call_tail(s, e);
            return;
        }
        if (is(".") && peek(1).kind == Token::Kind::Ident && split_pp(peek(1).text, "get", pp)) {
            next();
            next();
            s.kind = Stmt::Kind::Get;
            s.expr = e;
            s.pp = pp;
            s.pp_explicit = pp >= 0;
            return;
        }
        s.kind = Stmt::Kind::Assign;
        s.expr = e;
    }

    // precedence climbing
    ExprPtr expr() { return binary(1); }

    static int prec(const std::string& op) {
        if (op == "||") return 1;
        if (op == "&&") return 2;
        if (op == "==" || op == "!=") return 3;
        if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
        if (op == "+" || op == "-") return 5;
        if (op == "*" || op == "/") return 6;
        return 0;
    }

    ExprPtr binary(int minp) {
        ExprPtr lhs = unary();
        while (peek().kind == Token::Kind::Punct) {
            std::string op = peek().text;
            int p = prec(op);
            if (p == 0 || p < minp) break;
            Loc l = next().loc;
            ExprPtr rhs = binary(p + 1);
            lhs = mk_binary(op, lhs, rhs, l);
        }
        return lhs;
    }

    ExprPtr unary() {
        Loc l = peek().loc;
        if (accept("-")) {
            // fold literal negation so that printing round-trips
            ExprPtr a = unary();
            return mk_unary("-", a, l);
        }
        if (accept("!")) return mk_unary("!", unary(), l);
        return primary();
    }

    ExprPtr primary() {
        Loc l = peek().loc;
        const Token& t = peek();
        if (t.kind == Token::Kind::Int) {
            next();
            return mk_lit(Value(BigInt(t.text)), l);
        }
        if (accept("(")) {
            ExprPtr e = expr();
            expect(")");
            return e;
        }
        if (accept("True")) return mk_lit(Value(true), l);
        if (accept("False")) return mk_lit(Value(false), l);
        if (accept("Nil")) return mk_lit(Value(ValueList{}), l);
        if (accept("Never")) return mk_lit(Value::never(), l);
        if (accept("unit")) return mk_lit(Value::unit(), l);
        if (accept("this")) {
            expect(".");
            return mk_field(ident("field name"), l);
        }
        for (const char* f : {"len", "hd", "tl"}) {
            if (accept(f)) {
                expect("(");
                ExprPtr a = expr();
                expect(")");
                return mk_unary(f, a, l);
            }
        }
        if (accept("Cons")) {
            expect("(");
            ExprPtr a = expr();
            expect(",");
            ExprPtr b = expr();
            expect(")");
            return mk_binary("Cons", a, b, l);
        }
        if (t.kind == Token::Kind::Ident && !kKeywords.count(t.text)) {
            next();
            return mk_var(t.text, l);
        }
        fail("expected expression");
    }
};

void number_points(Program& p) {
    std::set<int> used;
    std::vector<Stmt*> pending;
    std::vector<Diagnostic> errs;
    std::function<void(Block&)> walk = [&](Block& b) {
        for (auto& s : b) {
            if (s->kind == Stmt::Kind::Get || s->kind == Stmt::Kind::Await) {
                if (s->pp >= 0) {
                    if (!used.insert(s->pp).second)
                        errs.push_back({p.file, s->loc, "duplicate program point " + std::to_string(s->pp)});
                } else {
                    pending.push_back(s.get());
                }
            }
            walk(s->then_b);
            walk(s->else_b);
            walk(s->body);
        }
    };
    for (auto& c : p.classes)
        for (auto& m : c.methods) walk(m.body);
    if (!errs.empty()) throw FrontendError(errs);
    int next = 0;
    for (Stmt* s : pending) {
        while (used.count(next)) ++next;
        s->pp = next;
        used.insert(next);
    }
}

}  // namespace

Program parse_program(const std::string& text, const std::string& file) {
    Parser ps(lex(text, file), file);
    Program p = ps.program();
    number_points(p);
    return p;
}

static std::string read_all(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FrontendError({{path, {0, 0}, "cannot open file"}});
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program parse_file(const std::string& path) { return parse_program(read_all(path), path); }

Program load_program(const std::string& text, const std::string& file) {
    Program p = parse_program(text, file);
    typecheck(p);
    desugar(p);
    auto ds = check_wellformed(p);
    if (!ds.empty()) throw FrontendError(ds);
    return p;
}

Program load_file(const std::string& path) { return load_program(read_all(path), path); }

}  // namespace cao
