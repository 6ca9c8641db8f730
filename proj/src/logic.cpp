#include "cao/logic.hpp"

#include "cao/frontend.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace cao {

// ---------------------------------------------------------------- truth values

TV tv_not(TV a) { return a == TV::True ? TV::False : a == TV::False ? TV::True : TV::Unknown; }
TV tv_and(TV a, TV b) {
    if (a == TV::False || b == TV::False) return TV::False;
    if (a == TV::True && b == TV::True) return TV::True;
    return TV::Unknown;
}
TV tv_or(TV a, TV b) { return tv_not(tv_and(tv_not(a), tv_not(b))); }
const char* tv_name(TV t) { return t == TV::True ? "true" : t == TV::False ? "false" : "unknown"; }

std::string to_string(const Sort& s) {
    switch (s.kind) {
    case Sort::Kind::Int: return "Int";
    case Sort::Kind::Rat: return "Rat";
    case Sort::Kind::Bool: return "Bool";
    case Sort::Kind::Nat: return "N";
    case Sort::Kind::Pos: return "I";
    case Sort::Kind::Fut: return "Fut";
    case Sort::Kind::Obj: return s.cls.empty() ? "O" : s.cls;
    case Sort::Kind::Method: return "M";
    case Sort::Kind::Any: return "Any";
    case Sort::Kind::List: return "List";
    case Sort::Kind::Heap: return "Heap";
    case Sort::Kind::Unit: return "Unit";
    }
    return "?";
}

Sort sort_of(const DataType& t) {
    switch (t.kind) {
    case DataType::Kind::Int: return {Sort::Kind::Int, ""};
    case DataType::Kind::Rat: return {Sort::Kind::Rat, ""};
    case DataType::Kind::Bool: return {Sort::Kind::Bool, ""};
    case DataType::Kind::Unit: return {Sort::Kind::Unit, ""};
    case DataType::Kind::List: return {Sort::Kind::List, ""};
    case DataType::Kind::Fut: return {Sort::Kind::Fut, ""};
    case DataType::Kind::Class: return {Sort::Kind::Obj, t.cls};
    case DataType::Kind::Any: return {Sort::Kind::Any, ""};
    }
    return {};
}

// ---------------------------------------------------------------- constructors

TermPtr t_var(std::string n) { return std::make_shared<Term>(Term{Term::Kind::Var, std::move(n), {}, {}}); }
TermPtr t_const(Value v) { return std::make_shared<Term>(Term{Term::Kind::Const, "", std::move(v), {}}); }
TermPtr t_field(std::string f) {
    auto fn = std::make_shared<Term>(Term{Term::Kind::FieldName, std::move(f), {}, {}});
    return t_app("select", {t_var("heap"), fn});
}
TermPtr t_method(std::string m) { return std::make_shared<Term>(Term{Term::Kind::Method, std::move(m), {}, {}}); }
TermPtr t_app(std::string f, std::vector<TermPtr> args) {
    return std::make_shared<Term>(Term{Term::Kind::App, std::move(f), {}, std::move(args)});
}
TermPtr t_wild() { return std::make_shared<Term>(Term{Term::Kind::Wild, "_", {}, {}}); }

namespace {
// isFutEv, isfutEv and isNoEv all name the same event kind.
std::optional<Event::Kind> pred_kind(const std::string& p) {
    if (p.size() <= 2) return std::nullopt;
    std::string k = p.substr(2);
    if (auto r = kind_from_name(k)) return r;
    k[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(k[0])));
    return kind_from_name(k);
}

FormulaPtr mk(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
Formula base(Formula::Kind k) {
    Formula f;
    f.kind = k;
    return f;
}

void conjuncts(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
    if (f->kind == Formula::Kind::And) {
        for (const auto& s : f->sub) conjuncts(s, out);
    } else {
        out.push_back(f);
    }
}

bool term_is_var(const TermPtr& t, const std::string& v) { return t->kind == Term::Kind::Var && t->name == v; }

// v occurs directly as an event-term argument of a conjunct (possibly under existentials)
bool anchors(const FormulaPtr& f, const std::string& v) {
    std::vector<FormulaPtr> cs;
    conjuncts(f, cs);
    for (const auto& c : cs) {
        if (c->kind == Formula::Kind::EvAt) {
            for (const auto& a : c->ev->args)
                if (term_is_var(a, v)) return true;
        }
        if (c->kind == Formula::Kind::Exists && c->var != v && anchors(c->sub[0], v)) return true;
    }
    return false;
}

bool anchors_universal(const FormulaPtr& body, const std::string& v) {
    FormulaPtr f = body;
    while (true) {
        if (f->kind == Formula::Kind::Implies) {
            if (anchors(f->sub[0], v)) return true;
            f = f->sub[1];
        } else if (f->kind == Formula::Kind::Forall && f->var != v) {
            f = f->sub[0];
        } else {
            return false;
        }
    }
}
}  // namespace

FormulaPtr f_true() {
    static FormulaPtr t = mk(base(Formula::Kind::True));
    return t;
}
FormulaPtr f_false() {
    static FormulaPtr t = mk(base(Formula::Kind::False));
    return t;
}
FormulaPtr f_atom(TermPtr t) {
    if (t->kind == Term::Kind::Const && t->val.is_bool()) return t->val.as_bool() ? f_true() : f_false();
    Formula f = base(Formula::Kind::Atom);
    f.t = {std::move(t)};
    return mk(std::move(f));
}
FormulaPtr f_eq(TermPtr a, TermPtr b) {
    Formula f = base(Formula::Kind::Eq);
    f.t = {std::move(a), std::move(b)};
    return mk(std::move(f));
}
FormulaPtr f_cmp(const std::string& op, TermPtr a, TermPtr b) { return f_atom(t_app(op, {std::move(a), std::move(b)})); }
FormulaPtr f_not(FormulaPtr a) {
    if (a->kind == Formula::Kind::True) return f_false();
    if (a->kind == Formula::Kind::False) return f_true();
    Formula f = base(Formula::Kind::Not);
    f.sub = {std::move(a)};
    return mk(std::move(f));
}
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
    if (a->kind == Formula::Kind::True) return b;
    if (b->kind == Formula::Kind::True) return a;
    if (a->kind == Formula::Kind::False || b->kind == Formula::Kind::False) return f_false();
    Formula f = base(Formula::Kind::And);
    f.sub = {std::move(a), std::move(b)};
    return mk(std::move(f));
}
FormulaPtr f_and(const std::vector<FormulaPtr>& xs) {
    if (xs.empty()) return f_true();
    FormulaPtr r = xs.back();
    for (size_t i = xs.size() - 1; i-- > 0;) r = f_and(xs[i], r);
    return r;
}
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
    if (a->kind == Formula::Kind::False) return b;
    if (b->kind == Formula::Kind::False) return a;
    if (a->kind == Formula::Kind::True || b->kind == Formula::Kind::True) return f_true();
    Formula f = base(Formula::Kind::Or);
    f.sub = {std::move(a), std::move(b)};
    return mk(std::move(f));
}
FormulaPtr f_or(const std::vector<FormulaPtr>& xs) {
    if (xs.empty()) return f_false();
    FormulaPtr r = xs.back();
    for (size_t i = xs.size() - 1; i-- > 0;) r = f_or(xs[i], r);
    return r;
}
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
    if (a->kind == Formula::Kind::True) return b;
    if (a->kind == Formula::Kind::False || b->kind == Formula::Kind::True) return f_true();
    Formula f = base(Formula::Kind::Implies);
    f.sub = {std::move(a), std::move(b)};
    return mk(std::move(f));
}
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b) {
    Formula f = base(Formula::Kind::Iff);
    f.sub = {std::move(a), std::move(b)};
    return mk(std::move(f));
}
FormulaPtr f_exists(std::string v, Sort s, FormulaPtr body) {
    Formula f = base(Formula::Kind::Exists);
    f.anchored = anchors(body, v);
    f.var = std::move(v);
    f.sort = std::move(s);
    f.sub = {std::move(body)};
    return mk(std::move(f));
}
FormulaPtr f_forall(std::string v, Sort s, FormulaPtr body) {
    Formula f = base(Formula::Kind::Forall);
    f.anchored = anchors_universal(body, v);
    f.var = std::move(v);
    f.sort = std::move(s);
    f.sub = {std::move(body)};
    return mk(std::move(f));
}
FormulaPtr f_exists_set(std::string v, FormulaPtr body) {
    Formula f = base(Formula::Kind::ExistsSet);
    f.var = std::move(v);
    f.sort = {Sort::Kind::Pos, ""};
    f.sub = {std::move(body)};
    return mk(std::move(f));
}
FormulaPtr f_forall_set(std::string v, FormulaPtr body) {
    Formula f = base(Formula::Kind::ForallSet);
    f.var = std::move(v);
    f.sort = {Sort::Kind::Pos, ""};
    f.sub = {std::move(body)};
    return mk(std::move(f));
}
FormulaPtr f_subset(TermPtr a, TermPtr b) {
    Formula f = base(Formula::Kind::Subset);
    f.t = {std::move(a), std::move(b)};
    return mk(std::move(f));
}
FormulaPtr f_member(TermPtr x, const std::string& set) { return f_subset(t_app("singleton", {std::move(x)}), t_var(set)); }
FormulaPtr f_evat(TermPtr pos, EvTerm ev) {
    Formula f = base(Formula::Kind::EvAt);
    f.t = {std::move(pos)};
    f.ev = std::make_shared<const EvTerm>(std::move(ev));
    return mk(std::move(f));
}
FormulaPtr f_stateat(TermPtr pos, FormulaPtr phi) {
    Formula f = base(Formula::Kind::StateAt);
    f.t = {std::move(pos)};
    f.sub = {std::move(phi)};
    return mk(std::move(f));
}
FormulaPtr f_pred(std::string name, TermPtr pos) {
    Formula f = base(Formula::Kind::Pred);
    f.var = std::move(name);
    f.t = {std::move(pos)};
    return mk(std::move(f));
}

// ---------------------------------------------------------------- printing

namespace {

int term_prec(const TermPtr& t) {
    if (t->kind == Term::Kind::Const && t->val.is_num()) {
        bool neg = t->val.is_int() ? t->val.as_int() < 0 : t->val.as_rat() < 0;
        return neg ? 7 : 9;
    }
    if (t->kind != Term::Kind::App) return 9;
    const std::string& f = t->name;
    if (t->args.size() == 2) {
        if (f == "||") return 1;
        if (f == "&&") return 2;
        if (f == "==" || f == "!=") return 3;
        if (f == "<" || f == "<=" || f == ">" || f == ">=") return 4;
        if (f == "+" || f == "-") return 5;
        if (f == "*" || f == "/" || f == "%") return 6;
        if (f == "index") return 8;
    }
    if (t->args.size() == 1 && (f == "-" || f == "!")) return 7;
    return 9;
}

std::string value_term(const Value& v) {
    if (v.is_bool()) return v.as_bool() ? "True" : "False";
    if (v.is_unit()) return "unit";
    if (v.is_int()) return v.as_int().str();
    if (v.is_rat()) {
        Rational r = v.as_rat();
        return "rat(" + boost::multiprecision::numerator(r).str() + "," + boost::multiprecision::denominator(r).str() + ")";
    }
    if (v.is_future()) return v.as_future() == 0 ? "Never" : "fut(" + std::to_string(v.as_future()) + ")";
    if (v.is_object()) return "obj(" + v.as_object() + ")";
    const auto& xs = v.as_list();
    std::string s = "Nil";
    for (size_t i = xs.size(); i-- > 0;) s = "Cons(" + value_term(xs[i]) + ", " + s + ")";
    return s;
}

std::string pt(const TermPtr& t, int need) {
    std::string s;
    int p = term_prec(t);
    switch (t->kind) {
    case Term::Kind::Var: s = t->name; break;
    case Term::Kind::Const: s = value_term(t->val); break;
    case Term::Kind::FieldName: s = t->name; break;
    case Term::Kind::Method: s = t->name; break;
    case Term::Kind::Wild: s = "_"; break;
    case Term::Kind::App: {
        const std::string& f = t->name;
        if (f == "select" && t->args.size() == 2 && term_is_var(t->args[0], "heap") &&
            t->args[1]->kind == Term::Kind::FieldName) {
            s = "this." + t->args[1]->name;
        } else if (f == "index" && t->args.size() == 2) {
            s = pt(t->args[0], 8) + "[" + pt(t->args[1], 0) + "]";
        } else if (p < 9 && t->args.size() == 2) {
            // left-assoc: right operand needs strictly higher precedence
            s = pt(t->args[0], p) + " " + f + " " + pt(t->args[1], p + 1);
        } else if (p == 7) {
            s = f + pt(t->args[0], 8);
        } else {
            s = f + "(";
            for (size_t i = 0; i < t->args.size(); ++i) s += (i ? ", " : "") + pt(t->args[i], 0);
            s += ")";
        }
        break;
    }
    }
    return p < need ? "(" + s + ")" : s;
}

std::string ev_string(const EvTerm& e) {
    if (e.diamond) return "<>";
    if (e.kind == Event::Kind::NoEv) return "noEv";
    std::string s = std::string(kind_name(e.kind)) + "(";
    for (size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + pt(e.args[i], 0);
    return s + ")";
}

int fprec(const FormulaPtr& f) {
    switch (f->kind) {
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
    case Formula::Kind::ExistsSet:
    case Formula::Kind::ForallSet: return 0;
    case Formula::Kind::Iff: return 1;
    case Formula::Kind::Implies: return 2;
    case Formula::Kind::Or: return 3;
    case Formula::Kind::And: return 4;
    case Formula::Kind::Not: return 5;
    default: return 6;
    }
}

std::string pf(const FormulaPtr& f, int need) {
    std::string s;
    int p = fprec(f);
    switch (f->kind) {
    case Formula::Kind::True: s = "true"; break;
    case Formula::Kind::False: s = "false"; break;
    case Formula::Kind::Atom: s = pt(f->t[0], 3); break;
    case Formula::Kind::Eq: s = pt(f->t[0], 5) + " = " + pt(f->t[1], 5); break;
    case Formula::Kind::Not: s = "!" + pf(f->sub[0], 6); break;
    case Formula::Kind::And: s = pf(f->sub[0], 5) + " & " + pf(f->sub[1], 4); break;
    case Formula::Kind::Or: s = pf(f->sub[0], 4) + " | " + pf(f->sub[1], 3); break;
    case Formula::Kind::Implies: s = pf(f->sub[0], 3) + " -> " + pf(f->sub[1], 2); break;
    case Formula::Kind::Iff: s = pf(f->sub[0], 2) + " <-> " + pf(f->sub[1], 2); break;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
        s = std::string(f->kind == Formula::Kind::Exists ? "exists " : "forall ") + f->var + ":" + to_string(f->sort) +
            ". " + pf(f->sub[0], 0);
        break;
    case Formula::Kind::ExistsSet:
    case Formula::Kind::ForallSet:
        s = std::string(f->kind == Formula::Kind::ExistsSet ? "exists " : "forall ") + f->var + " sub I. " +
            pf(f->sub[0], 0);
        break;
    case Formula::Kind::Subset:
        if (f->t[0]->kind == Term::Kind::App && f->t[0]->name == "singleton" && f->t[0]->args.size() == 1)
            s = pt(f->t[0]->args[0], 5) + " in " + pt(f->t[1], 9);
        else
            s = pt(f->t[0], 9) + " subseteq " + pt(f->t[1], 9);
        break;
    case Formula::Kind::EvAt: s = "[" + pt(f->t[0], 0) + "] = " + ev_string(*f->ev); break;
    case Formula::Kind::StateAt: s = "[" + pt(f->t[0], 0) + "] |- " + pf(f->sub[0], 6); break;
    case Formula::Kind::Pred: s = f->var + "(" + pt(f->t[0], 0) + ")"; break;
    }
    return p < need ? "(" + s + ")" : s;
}

}  // namespace

std::string to_string(const TermPtr& t) { return pt(t, 0); }
std::string to_string(const FormulaPtr& f) { return pf(f, 0); }

// ---------------------------------------------------------------- parsing

namespace {

struct Tok {
    enum class K { Ident, Num, Sym, End };
    K k = K::End;
    std::string s;
    size_t pos = 0;
};

std::vector<Tok> lex(const std::string& in) {
    static const char* syms[] = {"<->", "->", "|-", "<=", ">=", "==", "!=", "&&", "||", "<>", "/\\", "\\/",
                                 "(",   ")",  "[",  "]",  ",",  ".",  ":",  "+",  "-",  "*",  "/",  "%",
                                 "<",   ">",  "=",  "!",  "~",  "&",  "|",  "_"};
    std::vector<Tok> out;
    size_t i = 0;
    while (i < in.size()) {
        char c = in[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#') {  // comment to end of line
            while (i < in.size() && in[i] != '\n') ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < in.size() && std::isdigit(static_cast<unsigned char>(in[j]))) ++j;
            if (j + 1 < in.size() && in[j] == '.' && std::isdigit(static_cast<unsigned char>(in[j + 1]))) {
                ++j;
                while (j < in.size() && std::isdigit(static_cast<unsigned char>(in[j]))) ++j;
            }
            out.push_back({Tok::K::Num, in.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || (c == '_' && i + 1 < in.size() && std::isalnum(static_cast<unsigned char>(in[i + 1])))) {
            size_t j = i;
            while (j < in.size() && (std::isalnum(static_cast<unsigned char>(in[j])) || in[j] == '_' || in[j] == '\''))
                ++j;
            out.push_back({Tok::K::Ident, in.substr(i, j - i), i});
            i = j;
            continue;
        }
        bool found = false;
        for (const char* s : syms) {
            size_t n = std::char_traits<char>::length(s);
            if (in.compare(i, n, s) == 0) {
                out.push_back({Tok::K::Sym, s, i});
                i += n;
                found = true;
                break;
            }
        }
        if (!found) throw LogicError("unexpected character '" + std::string(1, c) + "' at offset " + std::to_string(i));
    }
    out.push_back({Tok::K::End, "", in.size()});
    return out;
}

struct Backtrack {};

class Parser {
public:
    explicit Parser(const std::string& s) : toks_(lex(s)) {}

    FormulaPtr formula_eof() {
        auto f = formula();
        expect_end();
        return f;
    }
    TermPtr term_eof() {
        auto t = term();
        expect_end();
        return t;
    }

private:
    std::vector<Tok> toks_;
    size_t i_ = 0;
    bool soft_ = false;  // inside a speculative parse

    const Tok& peek(size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    bool is(const std::string& s, size_t k = 0) const {
        const Tok& t = peek(k);
        return (t.k == Tok::K::Sym || t.k == Tok::K::Ident) && t.s == s;
    }
    bool accept(const std::string& s) {
        if (is(s)) {
            ++i_;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        if (soft_) throw Backtrack{};
        throw LogicError(msg + " at offset " + std::to_string(peek().pos) + (peek().s.empty() ? "" : " ('" + peek().s + "')"));
    }
    void expect(const std::string& s) {
        if (!accept(s)) fail("expected '" + s + "'");
    }
    void expect_end() {
        if (peek().k != Tok::K::End) fail("trailing input");
    }
    std::string ident() {
        if (peek().k != Tok::K::Ident) fail("expected identifier");
        return toks_[i_++].s;
    }

    FormulaPtr formula() { return iff(); }
    FormulaPtr iff() {
        auto a = implies();
        while (accept("<->")) a = f_iff(a, implies());
        return a;
    }
    FormulaPtr implies() {
        auto a = disj();
        if (accept("->")) return f_implies(a, implies());
        return a;
    }
    FormulaPtr disj() {
        auto a = conj();
        while (is("|") || is("||") || is("\\/") || is("or")) {
            ++i_;
            a = f_or(a, conj());
        }
        return a;
    }
    FormulaPtr conj() {
        auto a = unary();
        while (is("&") || is("&&") || is("/\\") || is("and")) {
            ++i_;
            a = f_and(a, unary());
        }
        return a;
    }
    FormulaPtr unary() {
        if (is("!") || is("~") || is("not")) {
            ++i_;
            return f_not(unary());
        }
        if (is("forall") || is("exists")) return quant();
        return primary();
    }

    Sort sort() {
        std::string s = ident();
        Sort r;
        if (s == "Int" || s == "Z") r.kind = Sort::Kind::Int;
        else if (s == "Rat") r.kind = Sort::Kind::Rat;
        else if (s == "Bool") r.kind = Sort::Kind::Bool;
        else if (s == "N" || s == "Nat") r.kind = Sort::Kind::Nat;
        else if (s == "I") r.kind = Sort::Kind::Pos;
        else if (s == "Fut") r.kind = Sort::Kind::Fut;
        else if (s == "O" || s == "Obj") r.kind = Sort::Kind::Obj;
        else if (s == "M") r.kind = Sort::Kind::Method;
        else if (s == "Any" || s == "Expr") r.kind = Sort::Kind::Any;
        else if (s == "List") r.kind = Sort::Kind::List;
        else if (s == "Heap") r.kind = Sort::Kind::Heap;
        else if (s == "Unit") r.kind = Sort::Kind::Unit;
        else if (std::isupper(static_cast<unsigned char>(s[0]))) r = {Sort::Kind::Obj, s};
        else fail("unknown sort '" + s + "'");
        if (accept("<")) {  // Fut<Int>, List<Int>: element sort is not tracked
            int depth = 1;
            while (depth > 0) {
                if (peek().k == Tok::K::End) fail("unterminated sort");
                if (is("<")) ++depth;
                if (is(">")) --depth;
                ++i_;
            }
        }
        return r;
    }

    FormulaPtr quant() {
        bool ex = ident() == "exists";
        struct B {
            std::string v;
            int kind;  // 0 sorted, 1 set, 2 member of set
            Sort s;
            std::string set;
        };
        std::vector<B> bs;
        do {
            std::vector<std::string> names{ident()};
            while (accept(",")) names.push_back(ident());
            B b;
            if (accept(":")) {
                b.kind = 0;
                b.s = sort();
            } else if (accept("sub") || accept("subseteq")) {
                b.kind = 1;
                Sort s = sort();
                if (s.kind != Sort::Kind::Pos) fail("set quantifiers range over positions I only");
            } else if (accept("in")) {
                b.kind = 2;
                b.set = ident();
            } else {
                fail("expected ':', 'sub' or 'in' in binder");
            }
            for (auto& n : names) {
                b.v = n;
                bs.push_back(b);
            }
        } while (accept(","));
        expect(".");
        FormulaPtr body = formula();
        for (size_t k = bs.size(); k-- > 0;) {
            const B& b = bs[k];
            if (b.kind == 1) {
                body = ex ? f_exists_set(b.v, body) : f_forall_set(b.v, body);
            } else if (b.kind == 2) {
                Sort pos{Sort::Kind::Pos, ""};
                body = ex ? f_exists(b.v, pos, f_and(f_member(t_var(b.v), b.set), body))
                          : f_forall(b.v, pos, f_implies(f_member(t_var(b.v), b.set), body));
            } else {
                body = ex ? f_exists(b.v, b.s, body) : f_forall(b.v, b.s, body);
            }
        }
        return body;
    }

    EvTerm evterm() {
        EvTerm e;
        if (accept("<>")) {
            e.diamond = true;
            return e;
        }
        std::string n = ident();
        if (n == "noEv") return e;
        auto k = kind_from_name(n);
        if (!k) fail("unknown event kind '" + n + "'");
        e.kind = *k;
        expect("(");
        if (!is(")")) {
            e.args.push_back(term());
            while (accept(",")) e.args.push_back(term());
        }
        expect(")");
        return e;
    }

    FormulaPtr primary() {
        if (accept("true")) return f_true();
        if (accept("false")) return f_false();
        if (is("[")) {
            ++i_;
            TermPtr pos = term();
            expect("]");
            if (accept("|-")) return f_stateat(pos, unary());
            if (accept("=") || accept("==")) return f_evat(pos, evterm());
            if (accept("!=")) return f_not(f_evat(pos, evterm()));
            fail("expected '=' or '|-' after position");
        }
        if (peek().k == Tok::K::Ident && is("(", 1)) {
            const std::string& n = peek().s;
            if (n == "isEvent" || n == "isState" || (n.size() > 2 && n.rfind("is", 0) == 0 && pred_kind(n))) {
                i_ += 2;
                TermPtr t = term();
                expect(")");
                return f_pred(n, t);
            }
        }
        if (is("(")) {
            size_t save = i_;
            bool was = soft_;
            soft_ = true;
            try {
                auto f = comparison();
                soft_ = was;
                return f;
            } catch (const Backtrack&) {
                soft_ = was;
                i_ = save;
            }
            expect("(");
            auto f = formula();
            expect(")");
            return f;
        }
        return comparison();
    }

    FormulaPtr comparison() {
        TermPtr a = term();
        if (accept("=") || accept("==")) return f_eq(a, term());
        if (accept("!=")) return f_not(f_eq(a, term()));
        for (const char* op : {"<=", ">=", "<", ">"}) {
            if (accept(op)) return f_cmp(op, a, term());
        }
        if (accept("in")) return f_subset(t_app("singleton", {a}), term());
        if (accept("subseteq")) return f_subset(a, term());
        return f_atom(a);
    }

    TermPtr term() {
        TermPtr a = mul();
        while (is("+") || is("-")) {
            std::string op = toks_[i_++].s;
            a = t_app(op, {a, mul()});
        }
        return a;
    }
    TermPtr mul() {
        TermPtr a = neg();
        while (is("*") || is("/") || is("%")) {
            std::string op = toks_[i_++].s;
            a = t_app(op, {a, neg()});
        }
        return a;
    }
    TermPtr neg() {
        if (accept("-")) {
            TermPtr a = neg();
            if (a->kind == Term::Kind::Const && a->val.is_num()) {
                auto v = apply_unary("-", a->val);
                if (v) return t_const(*v);
            }
            return t_app("-", {a});
        }
        return postfix();
    }
    TermPtr postfix() {
        TermPtr a = atom();
        while (is("[")) {
            ++i_;
            TermPtr ix = term();
            expect("]");
            a = t_app("index", {a, ix});
        }
        return a;
    }
    std::vector<TermPtr> args() {
        std::vector<TermPtr> xs;
        expect("(");
        if (!is(")")) {
            xs.push_back(term());
            while (accept(",")) xs.push_back(term());
        }
        expect(")");
        return xs;
    }
    BigInt int_lit() {
        bool neg = accept("-");
        if (peek().k != Tok::K::Num) fail("expected number");
        BigInt v(toks_[i_++].s);
        return neg ? BigInt(-v) : v;
    }
    TermPtr atom() {
        const Tok& t = peek();
        if (t.k == Tok::K::Num) {
            ++i_;
            auto dot = t.s.find('.');
            if (dot == std::string::npos) return t_const(Value(BigInt(t.s)));
            std::string frac = t.s.substr(dot + 1);
            BigInt den = 1;
            for (size_t k = 0; k < frac.size(); ++k) den *= 10;
            BigInt num(t.s.substr(0, dot) + frac);
            return t_const(normalize_number(Rational(num, den)));
        }
        if (accept("(")) {
            TermPtr a = term();
            expect(")");
            return a;
        }
        if (accept("_")) return t_wild();
        if (t.k != Tok::K::Ident) fail("expected term");
        std::string n = ident();
        if (n == "True") return t_const(Value(true));
        if (n == "False") return t_const(Value(false));
        if (n == "Nil") return t_const(Value::list({}));
        if (n == "Never") return t_const(Value::never());
        if (n == "unit") return t_const(Value::unit());
        if (n == "this") {
            expect(".");
            return t_field(ident());
        }
        if (is(".") && peek(1).k == Tok::K::Ident && std::isupper(static_cast<unsigned char>(n[0]))) {
            ++i_;
            return t_method(n + "." + ident());
        }
        if (is("(")) {
            if (n == "rat") {
                expect("(");
                BigInt p = int_lit();
                expect(",");
                BigInt q = int_lit();
                expect(")");
                if (q == 0) fail("zero denominator");
                return t_const(normalize_number(Rational(p, q)));
            }
            if (n == "fut") {
                expect("(");
                BigInt k = int_lit();
                expect(")");
                return t_const(Value::future(static_cast<uint64_t>(k)));
            }
            if (n == "obj") {
                expect("(");
                std::string o = ident();
                expect(")");
                return t_const(Value::object(o));
            }
            auto xs = args();
            if ((n == "select" || n == "store") && xs.size() >= 2 && xs[1]->kind == Term::Kind::Var) {
                xs[1] = std::make_shared<Term>(Term{Term::Kind::FieldName, xs[1]->name, {}, {}});
            }
            return t_app(n, std::move(xs));
        }
        return t_var(n);
    }
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) { return Parser(text).formula_eof(); }
TermPtr parse_term(const std::string& text) { return Parser(text).term_eof(); }

TermPtr term_of_expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Lit: return t_const(e.lit);
    case Expr::Kind::Var: return t_var(e.name);
    case Expr::Kind::Field: return t_field(e.name);
    case Expr::Kind::Unary: return t_app(e.op, {term_of_expr(*e.a)});
    case Expr::Kind::Binary: return t_app(e.op, {term_of_expr(*e.a), term_of_expr(*e.b)});
    }
    return nullptr;
}

FormulaPtr formula_of_expr(const Expr& e) {
    if (e.kind == Expr::Kind::Unary && e.op == "!") return f_not(formula_of_expr(*e.a));
    if (e.kind == Expr::Kind::Binary) {
        if (e.op == "&&") return f_and(formula_of_expr(*e.a), formula_of_expr(*e.b));
        if (e.op == "||") return f_or(formula_of_expr(*e.a), formula_of_expr(*e.b));
        if (e.op == "==") return f_eq(term_of_expr(*e.a), term_of_expr(*e.b));
        if (e.op == "!=") return f_not(f_eq(term_of_expr(*e.a), term_of_expr(*e.b)));
    }
    return f_atom(term_of_expr(e));
}

// ---------------------------------------------------------------- manipulation

namespace {
void fv_term(const TermPtr& t, std::set<std::string>& out) {
    if (t->kind == Term::Kind::Var) out.insert(t->name);
    for (const auto& a : t->args) fv_term(a, out);
}
void fv(const FormulaPtr& f, std::set<std::string>& out) {
    std::set<std::string> inner;
    for (const auto& t : f->t) fv_term(t, inner);
    if (f->ev)
        for (const auto& a : f->ev->args) fv_term(a, inner);
    for (const auto& s : f->sub) fv(s, inner);
    switch (f->kind) {
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
    case Formula::Kind::ExistsSet:
    case Formula::Kind::ForallSet: inner.erase(f->var); break;
    default: break;
    }
    out.insert(inner.begin(), inner.end());
}

FormulaPtr rebuild(const FormulaPtr& f, std::vector<TermPtr> ts, std::vector<FormulaPtr> subs,
                   std::shared_ptr<const EvTerm> ev) {
    switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False: return f;
    case Formula::Kind::Atom: return f_atom(ts[0]);
    case Formula::Kind::Eq: return f_eq(ts[0], ts[1]);
    case Formula::Kind::Not: return f_not(subs[0]);
    case Formula::Kind::And: return f_and(subs[0], subs[1]);
    case Formula::Kind::Or: return f_or(subs[0], subs[1]);
    case Formula::Kind::Implies: return f_implies(subs[0], subs[1]);
    case Formula::Kind::Iff: return f_iff(subs[0], subs[1]);
    case Formula::Kind::Exists: return f_exists(f->var, f->sort, subs[0]);
    case Formula::Kind::Forall: return f_forall(f->var, f->sort, subs[0]);
    case Formula::Kind::ExistsSet: return f_exists_set(f->var, subs[0]);
    case Formula::Kind::ForallSet: return f_forall_set(f->var, subs[0]);
    case Formula::Kind::Subset: return f_subset(ts[0], ts[1]);
    case Formula::Kind::EvAt: return f_evat(ts[0], *ev);
    case Formula::Kind::StateAt: return f_stateat(ts[0], subs[0]);
    case Formula::Kind::Pred: return f_pred(f->var, ts[0]);
    }
    return f;
}
}  // namespace

std::set<std::string> free_vars(const FormulaPtr& f) {
    std::set<std::string> out;
    fv(f, out);
    return out;
}
std::set<std::string> free_vars(const TermPtr& t) {
    std::set<std::string> out;
    fv_term(t, out);
    return out;
}

TermPtr subst(const TermPtr& t, const std::map<std::string, TermPtr>& m) {
    if (t->kind == Term::Kind::Var) {
        auto it = m.find(t->name);
        return it != m.end() ? it->second : t;
    }
    if (t->args.empty()) return t;
    std::vector<TermPtr> xs;
    bool changed = false;
    for (const auto& a : t->args) {
        xs.push_back(subst(a, m));
        changed = changed || xs.back() != a;
    }
    if (!changed) return t;
    auto r = std::make_shared<Term>(*t);
    r->args = std::move(xs);
    return r;
}

FormulaPtr subst(const FormulaPtr& f, const std::map<std::string, TermPtr>& m) {
    const std::map<std::string, TermPtr>* mp = &m;
    std::map<std::string, TermPtr> inner;
    switch (f->kind) {
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
    case Formula::Kind::ExistsSet:
    case Formula::Kind::ForallSet:
        if (m.count(f->var)) {
            inner = m;
            inner.erase(f->var);
            mp = &inner;
        }
        break;
    default: break;
    }
    std::vector<TermPtr> ts;
    for (const auto& t : f->t) ts.push_back(subst(t, *mp));
    std::vector<FormulaPtr> subs;
    for (const auto& s : f->sub) subs.push_back(subst(s, *mp));
    std::shared_ptr<const EvTerm> ev;
    if (f->ev) {
        EvTerm e = *f->ev;
        for (auto& a : e.args) a = subst(a, *mp);
        ev = std::make_shared<const EvTerm>(std::move(e));
    }
    return rebuild(f, std::move(ts), std::move(subs), std::move(ev));
}

bool mentions_var(const FormulaPtr& f, const std::string& v) { return free_vars(f).count(v) > 0; }

namespace {
int fresh_counter() {
    static std::atomic<int> n{0};
    return ++n;
}

Sort ev_arg_sort(Event::Kind k, size_t i) {
    auto S = [](Sort::Kind x) { return Sort{x, ""}; };
    if (i == 0) return S(Sort::Kind::Obj);
    switch (k) {
    case Event::Kind::InvEv:
        if (i == 1) return S(Sort::Kind::Obj);
        if (i == 2) return S(Sort::Kind::Fut);
        if (i == 3) return S(Sort::Kind::Method);
        return S(Sort::Kind::Any);
    case Event::Kind::InvREv:
        if (i == 1) return S(Sort::Kind::Fut);
        if (i == 2) return S(Sort::Kind::Method);
        return S(Sort::Kind::Any);
    case Event::Kind::FutEv:
    case Event::Kind::FutREv:
        if (i == 1) return S(Sort::Kind::Fut);
        if (i == 2) return S(Sort::Kind::Method);
        if (i == 3) return S(Sort::Kind::Any);
        return S(Sort::Kind::Int);
    default:
        if (i == 1) return S(Sort::Kind::Fut);
        if (i == 2) return S(Sort::Kind::Any);
        return S(Sort::Kind::Int);
    }
}
}  // namespace

FormulaPtr desugar_wildcards(const FormulaPtr& f) {
    std::vector<FormulaPtr> subs;
    for (const auto& s : f->sub) subs.push_back(desugar_wildcards(s));
    if (f->kind != Formula::Kind::EvAt) return subs.empty() ? f : rebuild(f, f->t, std::move(subs), f->ev);
    EvTerm e = *f->ev;
    std::vector<std::pair<std::string, Sort>> fresh;
    for (size_t i = 0; i < e.args.size(); ++i) {
        if (e.args[i]->kind != Term::Kind::Wild) continue;
        std::string n = "_w" + std::to_string(fresh_counter());
        fresh.emplace_back(n, ev_arg_sort(e.kind, i));
        e.args[i] = t_var(n);
    }
    FormulaPtr r = f_evat(f->t[0], std::move(e));
    for (size_t i = fresh.size(); i-- > 0;) r = f_exists(fresh[i].first, fresh[i].second, r);
    return r;
}

FormulaPtr relativize(const FormulaPtr& psi, const Sort& s, const std::string& var, const FormulaPtr& guard) {
    auto g = [&](const std::string& x) { return subst(guard, {{var, t_var(x)}}); };
    auto rec = [&](const FormulaPtr& f) { return relativize(f, s, var, guard); };
    switch (psi->kind) {
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Iff: {
        std::vector<FormulaPtr> subs;
        for (const auto& x : psi->sub) subs.push_back(rec(x));
        return rebuild(psi, psi->t, std::move(subs), psi->ev);
    }
    case Formula::Kind::Exists:
        if (psi->sort.kind == s.kind) return f_exists(psi->var, psi->sort, f_and(g(psi->var), rec(psi->sub[0])));
        return f_exists(psi->var, psi->sort, rec(psi->sub[0]));
    case Formula::Kind::Forall:
        if (psi->sort.kind == s.kind) return f_forall(psi->var, psi->sort, f_implies(g(psi->var), rec(psi->sub[0])));
        return f_forall(psi->var, psi->sort, rec(psi->sub[0]));
    case Formula::Kind::ExistsSet:
    case Formula::Kind::ForallSet: {
        if (s.kind != Sort::Kind::Pos) return rebuild(psi, psi->t, {rec(psi->sub[0])}, psi->ev);
        std::string x = "_r" + std::to_string(fresh_counter());
        FormulaPtr in = f_forall(x, {Sort::Kind::Pos, ""}, f_implies(f_member(t_var(x), psi->var), g(x)));
        if (psi->kind == Formula::Kind::ExistsSet) return f_exists_set(psi->var, f_and(in, rec(psi->sub[0])));
        return f_forall_set(psi->var, f_implies(in, rec(psi->sub[0])));
    }
    default: return psi;
    }
}

FormulaPtr nnf(const FormulaPtr& f) {
    std::function<FormulaPtr(const FormulaPtr&, bool)> go = [&](const FormulaPtr& x, bool neg) -> FormulaPtr {
        switch (x->kind) {
        case Formula::Kind::True: return neg ? f_false() : f_true();
        case Formula::Kind::False: return neg ? f_true() : f_false();
        case Formula::Kind::Not: return go(x->sub[0], !neg);
        case Formula::Kind::And:
            return neg ? f_or(go(x->sub[0], true), go(x->sub[1], true)) : f_and(go(x->sub[0], false), go(x->sub[1], false));
        case Formula::Kind::Or:
            return neg ? f_and(go(x->sub[0], true), go(x->sub[1], true)) : f_or(go(x->sub[0], false), go(x->sub[1], false));
        case Formula::Kind::Implies:
            return neg ? f_and(go(x->sub[0], false), go(x->sub[1], true)) : f_or(go(x->sub[0], true), go(x->sub[1], false));
        case Formula::Kind::Iff: {
            auto a = x->sub[0], b = x->sub[1];
            if (neg) return f_or(f_and(go(a, false), go(b, true)), f_and(go(a, true), go(b, false)));
            return f_or(f_and(go(a, false), go(b, false)), f_and(go(a, true), go(b, true)));
        }
        case Formula::Kind::Exists:
            return neg ? f_forall(x->var, x->sort, go(x->sub[0], true)) : f_exists(x->var, x->sort, go(x->sub[0], false));
        case Formula::Kind::Forall:
            return neg ? f_exists(x->var, x->sort, go(x->sub[0], true)) : f_forall(x->var, x->sort, go(x->sub[0], false));
        case Formula::Kind::ExistsSet:
            return neg ? f_forall_set(x->var, go(x->sub[0], true)) : f_exists_set(x->var, go(x->sub[0], false));
        case Formula::Kind::ForallSet:
            return neg ? f_exists_set(x->var, go(x->sub[0], true)) : f_forall_set(x->var, go(x->sub[0], false));
        case Formula::Kind::StateAt: {
            FormulaPtr r = f_stateat(x->t[0], nnf(x->sub[0]));
            return neg ? f_not(r) : r;
        }
        default: return neg ? f_not(x) : x;
        }
    };
    return go(f, false);
}

// ---------------------------------------------------------------- values

bool operator==(const LVal& a, const LVal& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case LVal::Kind::Val: return a.v == b.v;
    case LVal::Kind::Heap: return a.heap == b.heap;
    case LVal::Kind::Method:
    case LVal::Kind::Expr: return a.s == b.s;
    case LVal::Kind::Set: return a.set == b.set;
    }
    return false;
}

std::string to_string(const LVal& v) {
    switch (v.kind) {
    case LVal::Kind::Val: return to_string(v.v);
    case LVal::Kind::Method:
    case LVal::Kind::Expr: return v.s;
    case LVal::Kind::Heap: {
        std::string s = "{";
        bool first = true;
        for (const auto& [k, x] : v.heap) {
            s += (first ? "" : ", ") + k + " -> " + to_string(x);
            first = false;
        }
        return s + "}";
    }
    case LVal::Kind::Set: {
        std::string s = "{";
        bool first = true;
        for (long x : v.set) {
            s += (first ? "" : ", ") + std::to_string(x);
            first = false;
        }
        return s + "}";
    }
    }
    return "?";
}

LocalTrace slice(const LocalTrace& t, size_t a, size_t b) {
    LocalTrace r;
    r.path = t.path;
    for (size_t i = a; i <= b && i <= t.hs.size(); ++i) r.hs.push_back(t.hs[i - 1]);
    return r;
}

// ---------------------------------------------------------------- evaluation

namespace {

struct Undefined {};

Value ground(const SymPtr& e) {
    if (!e || !e->ground) throw LogicError("trace is not concrete: " + (e ? to_string(e) : std::string("null")));
    return e->val;
}

void collect_value(const Value& v, std::vector<Value>& out) {
    out.push_back(v);
    if (v.is_list())
        for (const auto& x : v.as_list()) collect_value(x, out);
}

struct Carrier {
    std::vector<Value> values;  // all occurring ground values
    std::set<std::string> methods;
    std::set<std::string> guards;
    std::vector<std::map<std::string, Value>> heaps;
};

void collect_state(const ObjState& s, Carrier& c) {
    std::map<std::string, Value> h;
    for (const auto& [k, v] : s.sigma) collect_value(ground(v), c.values);
    for (const auto& [k, v] : s.rho) {
        Value g = ground(v);
        collect_value(g, c.values);
        h[k] = g;
    }
    c.heaps.push_back(std::move(h));
}

void collect_formula_consts(const FormulaPtr& f, Carrier& c) {
    std::function<void(const TermPtr&)> ft = [&](const TermPtr& t) {
        if (t->kind == Term::Kind::Const) collect_value(t->val, c.values);
        if (t->kind == Term::Kind::Method) c.methods.insert(t->name);
        for (const auto& a : t->args) ft(a);
    };
    for (const auto& t : f->t) ft(t);
    if (f->ev)
        for (const auto& a : f->ev->args) ft(a);
    for (const auto& s : f->sub) collect_formula_consts(s, c);
}

class Evaluator {
public:
    Evaluator(const EvalConfig& cfg, const LocalTrace* tr) : cfg_(cfg), tr_(tr) {}

    void prepare(const FormulaPtr& root, const ObjState* st) {
        if (tr_) {
            for (const auto& h : tr_->hs) {
                if (auto* s = std::get_if<ObjState>(&h)) collect_state(*s, car_);
                if (auto* e = std::get_if<Event>(&h)) collect_event(*e);
            }
        }
        if (st) collect_state(*st, car_);
        collect_formula_consts(root, car_);
        for (const auto& m : cfg_.methods) car_.methods.insert(m);
        for (const auto& o : cfg_.objects) car_.values.push_back(Value::object(o));
        std::sort(car_.values.begin(), car_.values.end(), [](const Value& a, const Value& b) { return compare(a, b) < 0; });
        car_.values.erase(std::unique(car_.values.begin(), car_.values.end(),
                                      [](const Value& a, const Value& b) { return compare(a, b) == 0 && a.v.index() == b.v.index(); }),
                          car_.values.end());
    }

    TV eval(const FormulaPtr& f, Beta& b, const ObjState* st) {
        switch (f->kind) {
        case Formula::Kind::True: return TV::True;
        case Formula::Kind::False: return TV::False;
        case Formula::Kind::Atom: {
            try {
                LVal v = term(f->t[0], b, st);
                if (v.kind != LVal::Kind::Val || !v.v.is_bool()) throw LogicError("non-boolean atom " + to_string(f->t[0]));
                return v.v.as_bool() ? TV::True : TV::False;
            } catch (const Undefined&) {
                return TV::Unknown;
            }
        }
        case Formula::Kind::Eq: {
            try {
                return term(f->t[0], b, st) == term(f->t[1], b, st) ? TV::True : TV::False;
            } catch (const Undefined&) {
                return TV::Unknown;
            }
        }
        case Formula::Kind::Not: return tv_not(eval(f->sub[0], b, st));
        case Formula::Kind::And: {
            TV a = eval(f->sub[0], b, st);
            if (a == TV::False) return a;
            return tv_and(a, eval(f->sub[1], b, st));
        }
        case Formula::Kind::Or: {
            TV a = eval(f->sub[0], b, st);
            if (a == TV::True) return a;
            return tv_or(a, eval(f->sub[1], b, st));
        }
        case Formula::Kind::Implies: {
            TV a = eval(f->sub[0], b, st);
            if (a == TV::False) return TV::True;
            return tv_or(tv_not(a), eval(f->sub[1], b, st));
        }
        case Formula::Kind::Iff: {
            TV a = eval(f->sub[0], b, st), c = eval(f->sub[1], b, st);
            if (a == TV::Unknown || c == TV::Unknown) return TV::Unknown;
            return a == c ? TV::True : TV::False;
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
        case Formula::Kind::ExistsSet:
        case Formula::Kind::ForallSet: return memo(f, b, st);
        case Formula::Kind::Subset: {
            // membership in a bound set variable, without copying the set
            const TermPtr& l = f->t[0];
            if (l->kind == Term::Kind::App && l->name == "singleton" && f->t[1]->kind == Term::Kind::Var) {
                auto it = b.find(f->t[1]->name);
                if (it != b.end() && it->second.kind == LVal::Kind::Set) {
                    auto k = position(l->args[0], b, st);
                    if (!k) return TV::Unknown;
                    return it->second.set.count(static_cast<long>(*k)) ? TV::True : TV::False;
                }
            }
            try {
                LVal x = term(f->t[0], b, st), y = term(f->t[1], b, st);
                if (x.kind != LVal::Kind::Set || y.kind != LVal::Kind::Set) throw LogicError("subset of non-sets");
                return std::includes(y.set.begin(), y.set.end(), x.set.begin(), x.set.end()) ? TV::True : TV::False;
            } catch (const Undefined&) {
                return TV::Unknown;
            }
        }
        case Formula::Kind::EvAt: {
            auto k = position(f->t[0], b, st);
            if (!k) return TV::Unknown;
            const HistElem* h = at(*k);
            if (!h) return TV::False;
            return match_event(*f->ev, *h, b, st);
        }
        case Formula::Kind::StateAt: {
            auto k = position(f->t[0], b, st);
            if (!k) return TV::Unknown;
            const HistElem* h = at(*k);
            if (!h || !is_state(*h)) return TV::False;
            return eval(f->sub[0], b, &std::get<ObjState>(*h));
        }
        case Formula::Kind::Pred: {
            auto k = position(f->t[0], b, st);
            if (!k) return TV::Unknown;
            const HistElem* h = at(*k);
            if (!h) return TV::False;
            const std::string& p = f->var;
            if (p == "isEvent") return is_state(*h) ? TV::False : TV::True;
            if (p == "isState") return is_state(*h) ? TV::True : TV::False;
            if (p == "isDiamond") return is_diamond(*h) ? TV::True : TV::False;
            auto kind = pred_kind(p);
            if (!kind) throw LogicError("unknown predicate " + p);
            auto* e = std::get_if<Event>(h);
            return e && e->kind == *kind ? TV::True : TV::False;
        }
        }
        return TV::Unknown;
    }

private:
    const EvalConfig& cfg_;
    const LocalTrace* tr_;
    Carrier car_;
    std::unordered_map<const Formula*, std::vector<std::string>> fvs_;
    std::unordered_map<std::string, TV> cache_;

    void collect_event(const Event& e) {
        for (const SymPtr* p : {&e.obj, &e.callee, &e.fut, &e.val})
            if (*p) collect_value(ground(*p), car_.values);
        for (const auto& a : e.args) collect_value(ground(a), car_.values);
        if (!e.method.empty()) car_.methods.insert(e.method);
        if (e.pp >= 0) car_.values.push_back(Value(e.pp));
        if (e.guard) car_.guards.insert(print_expr(*e.guard));
    }

    const HistElem* at(const BigInt& k) const {
        if (!tr_) throw LogicError("trace position used outside a trace");
        if (k < 1 || k > BigInt(tr_->hs.size())) return nullptr;
        return &tr_->hs[static_cast<size_t>(k) - 1];
    }

    std::optional<BigInt> position(const TermPtr& t, Beta& b, const ObjState* st) {
        try {
            LVal v = term(t, b, st);
            if (v.kind != LVal::Kind::Val || !v.v.is_int()) throw LogicError("position is not an integer: " + to_string(t));
            return v.v.as_int();
        } catch (const Undefined&) {
            return std::nullopt;
        }
    }

    LVal field_of(const Event& e, size_t i) const {
        auto V = [](const SymPtr& s) { return LVal::of(ground(s)); };
        auto P = [&]() { return LVal::of(Value(e.pp)); };
        switch (e.kind) {
        case Event::Kind::InvEv:
            if (i == 0) return V(e.obj);
            if (i == 1) return V(e.callee);
            if (i == 2) return V(e.fut);
            if (i == 3) return LVal::method(e.method);
            return V(e.args[i - 4]);
        case Event::Kind::InvREv:
            if (i == 0) return V(e.obj);
            if (i == 1) return V(e.fut);
            if (i == 2) return LVal::method(e.method);
            return V(e.args[i - 3]);
        case Event::Kind::FutEv:
        case Event::Kind::FutREv:
            if (i == 0) return V(e.obj);
            if (i == 1) return V(e.fut);
            if (i == 2) return LVal::method(e.method);
            if (i == 3) return V(e.val);
            return P();
        case Event::Kind::CondEv:
        case Event::Kind::CondREv:
            if (i == 0) return V(e.obj);
            if (i == 1) return V(e.fut);
            if (i == 2) return LVal{LVal::Kind::Expr, {}, {}, e.guard ? print_expr(*e.guard) : "", {}};
            return P();
        case Event::Kind::SuspEv:
        case Event::Kind::SuspREv:
            if (i == 0) return V(e.obj);
            if (i == 1) return V(e.fut);
            if (i == 2) return V(e.val);
            return P();
        case Event::Kind::NoEv: break;
        }
        throw LogicError("event has no field");
    }

    size_t arity(const Event& e) const {
        switch (e.kind) {
        case Event::Kind::InvEv: return 4 + e.args.size();
        case Event::Kind::InvREv: return 3 + e.args.size();
        case Event::Kind::FutREv: return 5;
        case Event::Kind::NoEv: return 0;
        default: return 4;
        }
    }

    TV match_event(const EvTerm& et, const HistElem& h, Beta& b, const ObjState* st) {
        if (et.diamond) return is_diamond(h) ? TV::True : TV::False;
        auto* e = std::get_if<Event>(&h);
        if (!e || e->kind != et.kind) return TV::False;
        size_t n = arity(*e);
        size_t given = et.args.size();
        // futREv may omit its program point
        if (!(given == n || (e->kind == Event::Kind::FutREv && given == 4))) return TV::False;
        TV r = TV::True;
        for (size_t i = 0; i < given; ++i) {
            if (et.args[i]->kind == Term::Kind::Wild) continue;
            try {
                LVal want = term(et.args[i], b, st);
                LVal have = field_of(*e, i);
                if (want.kind == LVal::Kind::Method && have.kind == LVal::Kind::Expr) want.kind = LVal::Kind::Expr;
                if (!(want == have)) return TV::False;
            } catch (const Undefined&) {
                r = TV::Unknown;
            }
        }
        return r;
    }

    LVal lookup(const std::string& n, Beta& b, const ObjState* st) {
        auto it = b.find(n);
        if (it != b.end()) return it->second;
        if (st) {
            if (n == "heap") {
                LVal h;
                h.kind = LVal::Kind::Heap;
                for (const auto& [k, v] : st->rho) h.heap[k] = ground(v);
                return h;
            }
            auto s = st->sigma.find(n);
            if (s != st->sigma.end()) return LVal::of(ground(s->second));
            // references may be named without this.
            auto r = st->rho.find(n);
            if (r != st->rho.end()) return LVal::of(ground(r->second));
        }
        throw LogicError("unbound variable '" + n + "'");
    }

    LVal term(const TermPtr& t, Beta& b, const ObjState* st) {
        switch (t->kind) {
        case Term::Kind::Var: return lookup(t->name, b, st);
        case Term::Kind::Const: return LVal::of(t->val);
        case Term::Kind::Method: return LVal::method(t->name);
        case Term::Kind::FieldName: return LVal{LVal::Kind::Expr, {}, {}, t->name, {}};
        case Term::Kind::Wild: throw LogicError("wildcard outside an event term");
        case Term::Kind::App: break;
        }
        const std::string& f = t->name;
        if (f == "anon") throw LogicError("anon has no ground semantics");
        std::vector<LVal> xs;
        for (const auto& a : t->args) xs.push_back(term(a, b, st));
        auto val = [&](size_t i) -> const Value& {
            if (xs[i].kind != LVal::Kind::Val) throw LogicError("ill-sorted argument of " + f);
            return xs[i].v;
        };
        if (f == "select") {
            if (xs.size() != 2 || xs[0].kind != LVal::Kind::Heap || xs[1].kind != LVal::Kind::Expr)
                throw LogicError("ill-sorted select");
            auto it = xs[0].heap.find(xs[1].s);
            if (it == xs[0].heap.end()) throw Undefined{};
            return LVal::of(it->second);
        }
        if (f == "store") {
            if (xs.size() != 3 || xs[0].kind != LVal::Kind::Heap || xs[1].kind != LVal::Kind::Expr)
                throw LogicError("ill-sorted store");
            LVal h = xs[0];
            h.heap[xs[1].s] = val(2);
            return h;
        }
        if (f == "singleton") {
            LVal s;
            s.kind = LVal::Kind::Set;
            const Value& v = val(0);
            if (!v.is_int()) throw LogicError("singleton of a non-position");
            s.set.insert(static_cast<long>(v.as_int()));
            return s;
        }
        if (f == "index") {
            const Value& l = val(0);
            const Value& i = val(1);
            if (!l.is_list() || !i.is_int()) throw LogicError("ill-sorted index");
            if (i.as_int() < 0 || i.as_int() >= BigInt(l.as_list().size())) throw Undefined{};
            return LVal::of(l.as_list()[static_cast<size_t>(i.as_int())]);
        }
        if ((f == "==" || f == "!=") && xs.size() == 2 && (xs[0].kind != LVal::Kind::Val || xs[1].kind != LVal::Kind::Val))
            return LVal::of(Value((xs[0] == xs[1]) == (f == "==")));
        std::optional<Value> r;
        if (xs.size() == 1) r = apply_unary(f, val(0));
        else if (xs.size() == 2) r = apply_binary(f, val(0), val(1));
        else throw LogicError("unknown function " + f + "/" + std::to_string(xs.size()));
        if (!r) throw Undefined{};
        return LVal::of(*r);
    }

    // ---- quantifiers

    const std::vector<std::string>& fv_of(const Formula* f) {
        auto it = fvs_.find(f);
        if (it != fvs_.end()) return it->second;
        FormulaPtr dummy(std::shared_ptr<const Formula>(), f);
        auto s = free_vars(dummy);
        return fvs_[f] = std::vector<std::string>(s.begin(), s.end());
    }

    TV memo(const FormulaPtr& f, Beta& b, const ObjState* st) {
        std::string key = std::to_string(reinterpret_cast<uintptr_t>(f.get())) + "@" +
                          std::to_string(reinterpret_cast<uintptr_t>(st));
        for (const auto& v : fv_of(f.get())) {
            auto it = b.find(v);
            if (it != b.end()) key += "|" + v + "=" + std::to_string(static_cast<int>(it->second.kind)) + to_string(it->second);
        }
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        TV r = quantify(f, b, st);
        cache_[key] = r;
        return r;
    }

    std::vector<LVal> domain(const Sort& s, bool anchored, bool& complete) {
        std::vector<LVal> out;
        complete = true;
        auto ints = [&](bool nat) {
            std::set<BigInt> base{0};
            for (const auto& v : car_.values)
                if (v.is_int()) base.insert(v.as_int());
            std::set<BigInt> r;
            for (const auto& x : base) {
                if (anchored) {
                    r.insert(x);
                } else {
                    for (int d = -cfg_.halo; d <= cfg_.halo; ++d) r.insert(x + d);
                }
            }
            for (const auto& x : r)
                if (!nat || x >= 0) out.push_back(LVal::of(Value(x)));
            if (!anchored) complete = false;
        };
        switch (s.kind) {
        case Sort::Kind::Int: ints(false); break;
        case Sort::Kind::Nat: ints(true); break;
        case Sort::Kind::Rat:
            ints(false);
            for (const auto& v : car_.values)
                if (v.is_rat()) out.push_back(LVal::of(v));
            break;
        case Sort::Kind::Bool:
            out.push_back(LVal::of(Value(false)));
            out.push_back(LVal::of(Value(true)));
            break;
        case Sort::Kind::Unit: out.push_back(LVal::of(Value::unit())); break;
        case Sort::Kind::Pos:
            if (!tr_) throw LogicError("position quantifier outside a trace");
            for (size_t i = 1; i <= tr_->hs.size(); ++i) out.push_back(LVal::of(Value(static_cast<long>(i))));
            break;
        case Sort::Kind::Fut:
            out.push_back(LVal::of(Value::never()));
            for (const auto& v : car_.values)
                if (v.is_future() && v.as_future() != 0) out.push_back(LVal::of(v));
            break;
        case Sort::Kind::Obj:
            for (const auto& v : car_.values)
                if (v.is_object()) out.push_back(LVal::of(v));
            break;
        case Sort::Kind::Method:
            for (const auto& m : car_.methods) out.push_back(LVal::method(m));
            break;
        case Sort::Kind::List:
            out.push_back(LVal::of(Value::list({})));
            for (const auto& v : car_.values)
                if (v.is_list() && !v.as_list().empty()) out.push_back(LVal::of(v));
            complete = anchored;
            break;
        case Sort::Kind::Any:
            for (const auto& v : car_.values) out.push_back(LVal::of(v));
            for (const auto& m : car_.methods) out.push_back(LVal::method(m));
            for (const auto& g : car_.guards) out.push_back(LVal{LVal::Kind::Expr, {}, {}, g, {}});
            complete = anchored;
            break;
        case Sort::Kind::Heap:
            for (const auto& h : car_.heaps) {
                LVal x;
                x.kind = LVal::Kind::Heap;
                x.heap = h;
                out.push_back(std::move(x));
            }
            complete = false;
            break;
        }
        return out;
    }

    // Positions that may belong to set variable X: a conjunct forall x. ... x in X -> ... P(x)
    // excludes every position where the rest of the implication is false.
    std::optional<std::vector<long>> candidates(const FormulaPtr& body, const std::string& X, Beta& b,
                                                const ObjState* st) {
        std::vector<FormulaPtr> cs;
        conjuncts(body, cs);
        std::optional<std::vector<long>> best;
        for (const auto& c : cs) {
            if (c->kind != Formula::Kind::Forall || c->sort.kind != Sort::Kind::Pos) continue;
            const std::string& x = c->var;
            // flatten the implication chain, find the membership antecedent
            std::vector<FormulaPtr> ants;
            FormulaPtr f = c->sub[0];
            while (f->kind == Formula::Kind::Implies) {
                ants.push_back(f->sub[0]);
                f = f->sub[1];
            }
            bool has = false;
            std::vector<FormulaPtr> rest;
            for (const auto& a : ants) {
                bool mem = a->kind == Formula::Kind::Subset && a->t[1]->kind == Term::Kind::Var && a->t[1]->name == X &&
                           a->t[0]->kind == Term::Kind::App && a->t[0]->name == "singleton" &&
                           term_is_var(a->t[0]->args[0], x);
                if (mem && !has) has = true;
                else rest.push_back(a);
            }
            if (!has) continue;
            FormulaPtr p = f;
            for (size_t k = rest.size(); k-- > 0;) p = f_implies(rest[k], p);
            if (mentions_var(p, X)) continue;
            std::vector<long> ok;
            auto saved = b.find(x) != b.end() ? std::optional<LVal>(b[x]) : std::nullopt;
            for (size_t i = 1; i <= tr_->hs.size(); ++i) {
                b[x] = LVal::of(Value(static_cast<long>(i)));
                if (eval(p, b, st) != TV::False) ok.push_back(static_cast<long>(i));
            }
            if (saved) b[x] = *saved;
            else b.erase(x);
            if (!best || ok.size() < best->size()) best = std::move(ok);
        }
        return best;
    }

    TV quantify(const FormulaPtr& f, Beta& b, const ObjState* st) {
        bool ex = f->kind == Formula::Kind::Exists || f->kind == Formula::Kind::ExistsSet;
        std::optional<LVal> saved;
        if (auto it = b.find(f->var); it != b.end()) saved = it->second;
        TV acc = ex ? TV::False : TV::True;
        bool complete = true;
        auto step = [&](LVal v) -> bool {
            b[f->var] = std::move(v);
            TV r = eval(f->sub[0], b, st);
            if (ex) {
                if (r == TV::True) {
                    acc = TV::True;
                    return false;
                }
                if (r == TV::Unknown) acc = TV::Unknown;
            } else {
                if (r == TV::False) {
                    acc = TV::False;
                    return false;
                }
                if (r == TV::Unknown) acc = TV::Unknown;
            }
            return true;
        };
        if (f->kind == Formula::Kind::Exists || f->kind == Formula::Kind::Forall) {
            for (auto& v : domain(f->sort, f->anchored, complete))
                if (!step(std::move(v))) break;
        } else {
            if (!tr_) throw LogicError("set quantifier outside a trace");
            std::vector<long> pos;
            auto cand = ex ? candidates(f->sub[0], f->var, b, st) : std::nullopt;
            if (cand) {
                pos = *cand;
            } else {
                for (size_t i = 1; i <= tr_->hs.size(); ++i) pos.push_back(static_cast<long>(i));
            }
            if (static_cast<int>(pos.size()) > cfg_.subset_cap) {
                acc = TV::Unknown;
            } else {
                uint64_t n = uint64_t(1) << pos.size();
                for (uint64_t mask = 0; mask < n; ++mask) {
                    LVal s;
                    s.kind = LVal::Kind::Set;
                    for (size_t i = 0; i < pos.size(); ++i)
                        if (mask & (uint64_t(1) << i)) s.set.insert(pos[i]);
                    if (!step(std::move(s))) break;
                }
            }
        }
        if (saved) b[f->var] = *saved;
        else b.erase(f->var);
        if (!complete && acc != (ex ? TV::True : TV::False)) return TV::Unknown;
        return acc;
    }
};

}  // namespace

TV eval_fos(const FormulaPtr& phi, const ObjState& st, const Beta& beta, const EvalConfig& cfg) {
    Evaluator ev(cfg, nullptr);
    ev.prepare(phi, &st);
    Beta b = beta;
    return ev.eval(phi, b, &st);
}

TV eval_mso(const FormulaPtr& psi, const LocalTrace& theta, const Beta& beta, const EvalConfig& cfg) {
    Evaluator ev(cfg, &theta);
    ev.prepare(psi, nullptr);
    Beta b = beta;
    if (!b.count("last")) b["last"] = LVal::of(Value(static_cast<long>(theta.hs.size())));
    return ev.eval(psi, b, nullptr);
}

}  // namespace cao
