#include "cao/symexpr.hpp"

namespace cao {

namespace {

SymPtr raw(Sym::Kind k, std::string op, SymPtr a, SymPtr b = nullptr) {
    auto s = std::make_shared<Sym>();
    s->kind = k;
    s->op = std::move(op);
    s->ground = a->ground && (!b || b->ground);
    s->a = std::move(a);
    s->b = std::move(b);
    return s;
}

bool is_cmp(const std::string& op) {
    return op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=";
}

std::string negated_cmp(const std::string& op) {
    if (op == "<") return ">=";
    if (op == "<=") return ">";
    if (op == ">") return "<=";
    if (op == ">=") return "<";
    if (op == "==") return "!=";
    return "==";
}

struct Term {
    SymPtr atom;
    Rational coef;
};

void collect_sum(const SymPtr& e, const Rational& sign, std::vector<Term>& terms, Rational& c) {
    if (e->ground && e->kind == Sym::Kind::Val && e->val.is_num()) {
        c += sign * e->val.as_rat();
        return;
    }
    if (e->kind == Sym::Kind::Binary && (e->op == "+" || e->op == "-")) {
        collect_sum(e->a, sign, terms, c);
        collect_sum(e->b, e->op == "+" ? sign : Rational(-sign), terms, c);
        return;
    }
    if (e->kind == Sym::Kind::Unary && e->op == "-") {
        collect_sum(e->a, -sign, terms, c);
        return;
    }
    if (e->kind == Sym::Kind::Binary && e->op == "*") {
        if (e->a->kind == Sym::Kind::Val && e->a->val.is_num()) {
            collect_sum(e->b, sign * e->a->val.as_rat(), terms, c);
            return;
        }
        if (e->b->kind == Sym::Kind::Val && e->b->val.is_num()) {
            collect_sum(e->a, sign * e->b->val.as_rat(), terms, c);
            return;
        }
    }
    for (auto& t : terms)
        if (sym_eq(t.atom, e)) {
            t.coef += sign;
            return;
        }
    terms.push_back({e, sign});
}

SymPtr build_sum(const std::vector<Term>& terms, const Rational& c) {
    SymPtr acc;
    for (const auto& t : terms) {
        if (t.coef == 0) continue;
        Rational mag = t.coef < 0 ? Rational(-t.coef) : t.coef;
        SymPtr piece = mag == 1 ? t.atom : raw(Sym::Kind::Binary, "*", s_val(normalize_number(mag)), t.atom);
        if (!acc) {
            acc = t.coef < 0 ? raw(Sym::Kind::Unary, "-", piece) : piece;
        } else {
            acc = raw(Sym::Kind::Binary, t.coef < 0 ? "-" : "+", acc, piece);
        }
    }
    if (!acc) return s_val(normalize_number(c));
    if (c == 0) return acc;
    Rational mag = c < 0 ? Rational(-c) : c;
    return raw(Sym::Kind::Binary, c < 0 ? "-" : "+", acc, s_val(normalize_number(mag)));
}

SymPtr normalize_sum(const SymPtr& e) {
    std::vector<Term> terms;
    Rational c = 0;
    collect_sum(e, 1, terms, c);
    return build_sum(terms, c);
}

int prec(const Sym& e) {
    if (e.kind == Sym::Kind::Unary) return 7;
    if (e.kind != Sym::Kind::Binary) return 9;
    const std::string& op = e.op;
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/") return 6;
    return 9;  // Cons, index print as applications
}

void print(const SymPtr& e, int ctx, std::string& out) {
    bool paren = prec(*e) < ctx;
    if (paren) out += "(";
    switch (e->kind) {
    case Sym::Kind::Val: out += to_string(e->val); break;
    case Sym::Kind::Var: out += "$" + e->name; break;
    case Sym::Kind::Field: out += "$this." + e->name + "_" + std::to_string(e->counter); break;
    case Sym::Kind::Unary:
        if (e->op == "-" || e->op == "!") {
            out += e->op;
            print(e->a, 8, out);
        } else {
            out += e->op + "(";
            print(e->a, 0, out);
            out += ")";
        }
        break;
    case Sym::Kind::Binary:
        if (e->op == "Cons") {
            out += "Cons(";
            print(e->a, 0, out);
            out += ", ";
            print(e->b, 0, out);
            out += ")";
        } else if (e->op == "index") {
            print(e->a, 9, out);
            out += "[";
            print(e->b, 0, out);
            out += "]";
        } else {
            int p = prec(*e);
            print(e->a, p, out);
            out += " " + e->op + " ";
            print(e->b, p + 1, out);
        }
        break;
    }
    if (paren) out += ")";
}

}  // namespace

SymPtr s_val(Value v) {
    auto s = std::make_shared<Sym>();
    s->kind = Sym::Kind::Val;
    s->val = std::move(v);
    return s;
}

SymPtr s_var(uint64_t id, std::string name) {
    auto s = std::make_shared<Sym>();
    s->kind = Sym::Kind::Var;
    s->id = id;
    s->name = std::move(name);
    s->ground = false;
    return s;
}

SymPtr s_field(std::string f, int counter) {
    auto s = std::make_shared<Sym>();
    s->kind = Sym::Kind::Field;
    s->name = std::move(f);
    s->counter = counter;
    s->ground = false;
    return s;
}

bool is_true(const SymPtr& e) { return e->kind == Sym::Kind::Val && e->val.is_bool() && e->val.as_bool(); }
bool is_false(const SymPtr& e) { return e->kind == Sym::Kind::Val && e->val.is_bool() && !e->val.as_bool(); }

SymPtr s_unary(const std::string& op, const SymPtr& a) {
    if (!a) return nullptr;
    if (a->ground) {
        auto r = apply_unary(op, a->val);
        return r ? s_val(*r) : nullptr;
    }
    if (op == "!") {
        if (a->kind == Sym::Kind::Unary && a->op == "!") return a->a;
        if (a->kind == Sym::Kind::Binary && is_cmp(a->op)) return raw(Sym::Kind::Binary, negated_cmp(a->op), a->a, a->b);
        return raw(Sym::Kind::Unary, op, a);
    }
    if (op == "-") {
        if (a->kind == Sym::Kind::Unary && a->op == "-") return a->a;
        return normalize_sum(raw(Sym::Kind::Unary, op, a));
    }
    if (a->kind == Sym::Kind::Binary && a->op == "Cons") {
        if (op == "hd") return a->a;
        if (op == "tl") return a->b;
        if (op == "len") return s_binary("+", s_unary("len", a->b), s_val(1));
    }
    return raw(Sym::Kind::Unary, op, a);
}

SymPtr s_binary(const std::string& op, const SymPtr& a, const SymPtr& b) {
    if (!a || !b) return nullptr;
    if (a->ground && b->ground) {
        auto r = apply_binary(op, a->val, b->val);
        return r ? s_val(*r) : nullptr;
    }
    if (op == "&&") {
        if (a->ground) return a->val.as_bool() ? b : a;
        if (b->ground) return b->val.as_bool() ? a : b;
    }
    if (op == "||") {
        if (a->ground) return a->val.as_bool() ? a : b;
        if (b->ground) return b->val.as_bool() ? b : a;
    }
    if ((op == "==" || op == "!=") && sym_eq(a, b)) return s_val(op == "==");
    if (op == "+" || op == "-") return normalize_sum(raw(Sym::Kind::Binary, op, a, b));
    if (op == "*") {
        for (auto [k, x] : {std::pair{a, b}, std::pair{b, a}}) {
            if (k->ground && k->val.is_num()) {
                if (k->val.as_rat() == 0) return s_val(k->val);
                if (k->val.as_rat() == 1) return x;
            }
        }
    }
    if (op == "/" && b->ground) {
        if (!b->val.is_num() || b->val.as_rat() == 0) return nullptr;
    }
    return raw(Sym::Kind::Binary, op, a, b);
}

int compare(const SymPtr& a, const SymPtr& b) {
    if (a == b) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
    case Sym::Kind::Val: return compare(a->val, b->val);
    case Sym::Kind::Var: return a->id < b->id ? -1 : (a->id == b->id ? 0 : 1);
    case Sym::Kind::Field:
        if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
        return a->counter < b->counter ? -1 : (a->counter == b->counter ? 0 : 1);
    default: break;
    }
    if (int c = a->op.compare(b->op)) return c < 0 ? -1 : 1;
    if (int c = compare(a->a, b->a)) return c;
    if (a->kind == Sym::Kind::Binary) return compare(a->b, b->b);
    return 0;
}

std::string to_string(const SymPtr& e) {
    if (!e) return "<undefined>";
    std::string out;
    print(e, 0, out);
    return out;
}

Atom atom_of(const Sym& leaf) {
    if (leaf.kind == Sym::Kind::Field) return {true, 0, leaf.name, leaf.counter};
    return {false, leaf.id, leaf.name, 0};
}

std::string to_string(const Atom& a) {
    if (a.field) return "$this." + a.name + "_" + std::to_string(a.counter);
    return "$" + a.name;
}

void collect_atoms(const SymPtr& e, std::set<Atom>& out) {
    if (!e || e->ground) return;
    switch (e->kind) {
    case Sym::Kind::Var:
    case Sym::Kind::Field: out.insert(atom_of(*e)); return;
    case Sym::Kind::Unary: collect_atoms(e->a, out); return;
    case Sym::Kind::Binary:
        collect_atoms(e->a, out);
        collect_atoms(e->b, out);
        return;
    default: return;
    }
}

bool mentions_atoms(const SymPtr& e) { return e && !e->ground; }

SymPtr substitute(const SymPtr& e, const std::function<SymPtr(const Sym&)>& f) {
    if (!e || e->ground) return e;
    switch (e->kind) {
    case Sym::Kind::Var:
    case Sym::Kind::Field: {
        SymPtr r = f(*e);
        return r ? r : e;
    }
    case Sym::Kind::Unary: {
        SymPtr a = substitute(e->a, f);
        if (!a) return nullptr;
        return a == e->a ? e : s_unary(e->op, a);
    }
    case Sym::Kind::Binary: {
        SymPtr a = substitute(e->a, f);
        SymPtr b = substitute(e->b, f);
        if (!a || !b) return nullptr;
        return a == e->a && b == e->b ? e : s_binary(e->op, a, b);
    }
    default: return e;
    }
}

SymPtr substitute(const SymPtr& e, const AtomMap& m) {
    if (m.empty()) return e;
    return substitute(e, [&](const Sym& leaf) -> SymPtr {
        auto it = m.find(atom_of(leaf));
        return it == m.end() ? nullptr : it->second;
    });
}

namespace {
int compare_map(const std::map<std::string, SymPtr>& a, const std::map<std::string, SymPtr>& b) {
    auto i = a.begin(), j = b.begin();
    for (; i != a.end() && j != b.end(); ++i, ++j) {
        if (int c = i->first.compare(j->first)) return c < 0 ? -1 : 1;
        if (int c = compare(i->second, j->second)) return c;
    }
    if (i == a.end() && j == b.end()) return 0;
    return i == a.end() ? -1 : 1;
}

std::string map_str(const std::map<std::string, SymPtr>& m) {
    std::string s;
    for (const auto& [k, v] : m) {
        if (!s.empty()) s += ", ";
        s += k + " -> " + to_string(v);
    }
    return s;
}
}  // namespace

bool heap_eq(const std::map<std::string, SymPtr>& a, const std::map<std::string, SymPtr>& b) {
    return compare_map(a, b) == 0;
}

bool operator==(const ObjState& a, const ObjState& b) { return compare(a, b) == 0; }

int compare(const ObjState& a, const ObjState& b) {
    if (int c = compare_map(a.sigma, b.sigma)) return c;
    return compare_map(a.rho, b.rho);
}

bool is_concrete(const ObjState& s) {
    for (const auto& [k, v] : s.sigma)
        if (!v->ground) return false;
    for (const auto& [k, v] : s.rho)
        if (!v->ground) return false;
    return true;
}

std::string to_string(const ObjState& s) {
    return "(" + (s.sigma.empty() ? std::string(".") : map_str(s.sigma)) + " | " + map_str(s.rho) + ")";
}

SymPtr FreshGen::fresh(const std::string& base) {
    int n = ++names_[base];
    return s_var(next_id_++, n == 1 ? base : base + "~" + std::to_string(n));
}

SymPtr eval_expr(const Expr& e, const ObjState& s) {
    switch (e.kind) {
    case Expr::Kind::Lit: return s_val(e.lit);
    case Expr::Kind::Var: {
        auto it = s.sigma.find(e.name);
        if (it != s.sigma.end()) return it->second;
        auto jt = s.rho.find(e.name);
        return jt == s.rho.end() ? nullptr : jt->second;
    }
    case Expr::Kind::Field: {
        auto it = s.rho.find(e.name);
        return it == s.rho.end() ? nullptr : it->second;
    }
    case Expr::Kind::Unary: return s_unary(e.op, eval_expr(*e.a, s));
    case Expr::Kind::Binary: return s_binary(e.op, eval_expr(*e.a, s), eval_expr(*e.b, s));
    }
    return nullptr;
}

}  // namespace cao
