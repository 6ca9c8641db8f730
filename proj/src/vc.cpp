// Updates, term simplification and the VC decision procedure.
//
// discharge_vc negates the goal, splits into a DNF of literals and closes every
// disjunct by congruence closure plus Fourier-Motzkin over the rationals (with
// integer tightening). Invalid is only reported for a model found by brute force
// and confirmed by the evaluator.
#include "cao/bpl.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

namespace cao {

// ---------------------------------------------------------------- updates

Update upd_assign(const std::string& v, TermPtr t) {
    Update u;
    u.m[v] = std::move(t);
    return u;
}

Update upd_parallel(const Update& a, const Update& b) {
    Update r = a;
    for (const auto& [k, v] : b.m) r.m[k] = v;
    return r;
}

Update upd_seq(const Update& a, const Update& b) {
    Update r = a;
    for (const auto& [k, v] : b.m) r.m[k] = apply_update(a, v);
    return r;
}

std::string to_string(const Update& u) {
    std::string s = "{";
    bool first = true;
    for (const auto& [k, v] : u.m) {
        if (!first) s += " || ";
        first = false;
        s += k + " := " + to_string(v);
    }
    return s + "}";
}

TermPtr apply_update(const Update& u, const TermPtr& t) { return simplify(u.m.empty() ? t : subst(t, u.m)); }
FormulaPtr apply_update(const Update& u, const FormulaPtr& f) { return simplify(u.m.empty() ? f : subst(f, u.m)); }

// ---------------------------------------------------------------- simplification

namespace {

bool is_app(const TermPtr& t, const char* f, size_t n) {
    return t->kind == Term::Kind::App && t->name == f && t->args.size() == n;
}
bool is_num_const(const TermPtr& t) { return t->kind == Term::Kind::Const && t->val.is_num(); }
bool is_zero(const TermPtr& t) { return is_num_const(t) && t->val == Value(0); }
bool is_one(const TermPtr& t) { return is_num_const(t) && t->val == Value(1); }

TermPtr simp_app(const std::string& f, std::vector<TermPtr> xs) {
    if (f == "select" && xs.size() == 2 && xs[1]->kind == Term::Kind::FieldName) {
        TermPtr h = xs[0];
        // read-over-write; distinct field names never alias
        while (is_app(h, "store", 3) && h->args[1]->kind == Term::Kind::FieldName) {
            if (h->args[1]->name == xs[1]->name) return h->args[2];
            h = h->args[0];
        }
        return t_app("select", {h, xs[1]});
    }
    if (xs.size() == 1 && is_app(xs[0], "Cons", 2)) {
        if (f == "hd") return xs[0]->args[0];
        if (f == "tl") return xs[0]->args[1];
        if (f == "len") return simp_app("+", {simp_app("len", {xs[0]->args[1]}), t_const(Value(1))});
    }
    bool ground = std::all_of(xs.begin(), xs.end(), [](const TermPtr& a) { return a->kind == Term::Kind::Const; });
    if (ground && f != "select" && f != "store" && f != "anon" && f != "singleton") {
        std::optional<Value> r;
        if (xs.size() == 1) r = apply_unary(f, xs[0]->val);
        else if (xs.size() == 2) r = apply_binary(f, xs[0]->val, xs[1]->val);
        if (r) return t_const(*r);
    }
    if (xs.size() == 2) {
        if (f == "+" && is_zero(xs[1])) return xs[0];
        if (f == "+" && is_zero(xs[0])) return xs[1];
        if (f == "-" && is_zero(xs[1])) return xs[0];
        if (f == "*" && is_one(xs[1])) return xs[0];
        if (f == "*" && is_one(xs[0])) return xs[1];
    }
    if (f == "-" && xs.size() == 1 && is_app(xs[0], "-", 1)) return xs[0]->args[0];
    return t_app(f, std::move(xs));
}

}  // namespace

TermPtr simplify(const TermPtr& t) {
    if (t->kind != Term::Kind::App) return t;
    std::vector<TermPtr> xs;
    bool same = true;
    for (const auto& a : t->args) {
        xs.push_back(simplify(a));
        same = same && xs.back() == a;
    }
    TermPtr r = simp_app(t->name, std::move(xs));
    if (same && r->kind == Term::Kind::App && r->name == t->name && r->args == t->args) return t;
    return r;
}

FormulaPtr simplify(const FormulaPtr& f) {
    using K = Formula::Kind;
    switch (f->kind) {
    case K::True:
    case K::False: return f;
    case K::Atom: return f_atom(simplify(f->t[0]));
    case K::Eq: {
        TermPtr a = simplify(f->t[0]), b = simplify(f->t[1]);
        if (a->kind == Term::Kind::Const && b->kind == Term::Kind::Const) return a->val == b->val ? f_true() : f_false();
        if (to_string(a) == to_string(b)) return f_true();
        return f_eq(a, b);
    }
    case K::Not: return f_not(simplify(f->sub[0]));
    case K::And: return f_and(simplify(f->sub[0]), simplify(f->sub[1]));
    case K::Or: return f_or(simplify(f->sub[0]), simplify(f->sub[1]));
    case K::Implies: return f_implies(simplify(f->sub[0]), simplify(f->sub[1]));
    case K::Iff: return f_iff(simplify(f->sub[0]), simplify(f->sub[1]));
    case K::Exists: return f_exists(f->var, f->sort, simplify(f->sub[0]));
    case K::Forall: return f_forall(f->var, f->sort, simplify(f->sub[0]));
    case K::ExistsSet: return f_exists_set(f->var, simplify(f->sub[0]));
    case K::ForallSet: return f_forall_set(f->var, simplify(f->sub[0]));
    case K::StateAt: return f_stateat(simplify(f->t[0]), simplify(f->sub[0]));
    default: return f;
    }
}

const char* validity_name(Validity v) {
    switch (v) {
    case Validity::Valid: return "valid";
    case Validity::Invalid: return "invalid";
    case Validity::Unknown: return "unknown";
    }
    return "?";
}

// ---------------------------------------------------------------- decision procedure

namespace {

using K = Formula::Kind;

// Boolean connectives hidden inside atoms become formula structure.
FormulaPtr structurize(const FormulaPtr& f) {
    switch (f->kind) {
    case K::Atom: {
        const TermPtr& t = f->t[0];
        if (t->kind == Term::Kind::App) {
            const auto& n = t->name;
            if (n == "&&" && t->args.size() == 2)
                return f_and(structurize(f_atom(t->args[0])), structurize(f_atom(t->args[1])));
            if (n == "||" && t->args.size() == 2)
                return f_or(structurize(f_atom(t->args[0])), structurize(f_atom(t->args[1])));
            if (n == "!" && t->args.size() == 1) return f_not(structurize(f_atom(t->args[0])));
            if (n == "==" && t->args.size() == 2) return f_eq(t->args[0], t->args[1]);
            if (n == "!=" && t->args.size() == 2) return f_not(f_eq(t->args[0], t->args[1]));
            if ((n == "<" || n == "<=" || n == ">" || n == ">=") && t->args.size() == 2) return f;
        }
        return f_eq(t, t_const(Value(true)));
    }
    case K::Not: return f_not(structurize(f->sub[0]));
    case K::And: return f_and(structurize(f->sub[0]), structurize(f->sub[1]));
    case K::Or: return f_or(structurize(f->sub[0]), structurize(f->sub[1]));
    case K::Implies: return f_implies(structurize(f->sub[0]), structurize(f->sub[1]));
    case K::Iff: return f_iff(structurize(f->sub[0]), structurize(f->sub[1]));
    default: return f;
    }
}

struct Lit {
    enum class T { Eq, Ne, Le, Lt, Opaque } k = T::Eq;
    TermPtr a, b;
    std::string key;
    bool neg = false;  // Opaque only
};

struct Lin {
    std::map<int, Rational> a;
    Rational c = 0;
};

Lin lin_add(const Lin& x, const Lin& y, const Rational& k = 1) {
    Lin r = x;
    for (const auto& [v, q] : y.a) {
        r.a[v] += k * q;
        if (r.a[v] == 0) r.a.erase(v);
    }
    r.c += k * y.c;
    return r;
}
Lin lin_scale(const Lin& x, const Rational& k) {
    Lin r;
    if (k == 0) return r;
    for (const auto& [v, q] : x.a) r.a[v] = q * k;
    r.c = x.c * k;
    return r;
}

struct Con {
    Lin l;  // l (< | <=) 0
    bool strict = false;
};

BigInt lcm_den(const Lin& l) {
    BigInt m = boost::multiprecision::denominator(l.c);
    for (const auto& [v, q] : l.a) {
        BigInt d = boost::multiprecision::denominator(q);
        m = m / boost::multiprecision::gcd(m, d) * d;
    }
    return m;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
    return q;
}

struct Theory {
    const SortMap& sorts;
    // congruence closure
    std::vector<TermPtr> node;
    std::map<std::string, int> ids;
    std::vector<int> parent;
    std::vector<bool> intish;

    explicit Theory(const SortMap& s) : sorts(s) {}

    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a), b = find(b);
        if (a != b) parent[a] = b;
    }
    int id(const TermPtr& t) {
        std::string k = to_string(t);
        auto it = ids.find(k);
        if (it != ids.end()) return it->second;
        for (const auto& a : t->args) id(a);
        int n = static_cast<int>(node.size());
        node.push_back(t);
        parent.push_back(n);
        intish.push_back(false);
        ids[k] = n;
        return n;
    }

    bool sort_num(const Sort& s) const {
        return s.kind == Sort::Kind::Int || s.kind == Sort::Kind::Rat || s.kind == Sort::Kind::Nat;
    }
    bool sort_int(const Sort& s) const { return s.kind == Sort::Kind::Int || s.kind == Sort::Kind::Nat; }

    const Sort* var_sort(const TermPtr& t) const {
        if (t->kind == Term::Kind::Var) {
            auto it = sorts.find(t->name);
            return it == sorts.end() ? nullptr : &it->second;
        }
        if (is_app(t, "select", 2) && t->args[1]->kind == Term::Kind::FieldName) {
            auto it = sorts.find("@" + t->args[1]->name);
            return it == sorts.end() ? nullptr : &it->second;
        }
        return nullptr;
    }

    bool numeric(const TermPtr& t) const {
        if (t->kind == Term::Kind::Const) return t->val.is_num();
        if (const Sort* s = var_sort(t)) return sort_num(*s);
        if (t->kind != Term::Kind::App) return false;
        const auto& f = t->name;
        return f == "+" || f == "-" || f == "*" || f == "/" || f == "len";
    }
    bool integral(const TermPtr& t) const {
        if (t->kind == Term::Kind::Const) return t->val.is_int();
        if (const Sort* s = var_sort(t)) return sort_int(*s);
        if (t->kind != Term::Kind::App) return false;
        const auto& f = t->name;
        if (f == "len") return true;
        if (f == "+" || f == "-" || f == "*")
            return std::all_of(t->args.begin(), t->args.end(), [&](const TermPtr& a) { return integral(a); });
        return false;
    }

    bool close() {
        // naive congruence fixpoint; the VCs are small
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t i = 0; i < node.size(); ++i) {
                if (node[i]->kind != Term::Kind::App) continue;
                for (size_t j = i + 1; j < node.size(); ++j) {
                    if (node[j]->kind != Term::Kind::App || node[j]->name != node[i]->name) continue;
                    if (node[j]->args.size() != node[i]->args.size()) continue;
                    if (find(int(i)) == find(int(j))) continue;
                    bool eq = true;
                    for (size_t k = 0; k < node[i]->args.size() && eq; ++k)
                        eq = find(id(node[i]->args[k])) == find(id(node[j]->args[k]));
                    if (eq) {
                        unite(int(i), int(j));
                        changed = true;
                    }
                }
            }
        }
        // distinct constants may not be merged
        std::map<int, const Value*> cval;
        std::map<int, bool> has_cons;
        for (size_t i = 0; i < node.size(); ++i) {
            int r = find(int(i));
            const TermPtr& t = node[i];
            if (t->kind == Term::Kind::Const) {
                auto it = cval.find(r);
                if (it != cval.end() && !(*it->second == t->val)) return false;
                cval[r] = &t->val;
            }
            if (is_app(t, "Cons", 2)) has_cons[r] = true;
        }
        for (const auto& [r, v] : cval)
            if (has_cons.count(r) && v->is_list() && v->as_list().empty()) return false;
        return true;
    }

    std::optional<Value> class_const(int r) {
        for (size_t i = 0; i < node.size(); ++i)
            if (find(int(i)) == r && node[i]->kind == Term::Kind::Const) return node[i]->val;
        return std::nullopt;
    }

    Lin lin(const TermPtr& t) {
        Lin r;
        if (is_num_const(t)) {
            r.c = t->val.as_rat();
            return r;
        }
        if (t->kind == Term::Kind::App) {
            const auto& f = t->name;
            if ((f == "+" || f == "-") && t->args.size() == 2)
                return lin_add(lin(t->args[0]), lin(t->args[1]), f == "+" ? 1 : -1);
            if (f == "-" && t->args.size() == 1) return lin_scale(lin(t->args[0]), -1);
            if (f == "*" && t->args.size() == 2) {
                Lin x = lin(t->args[0]), y = lin(t->args[1]);
                if (x.a.empty()) return lin_scale(y, x.c);
                if (y.a.empty()) return lin_scale(x, y.c);
            }
            if (f == "/" && t->args.size() == 2) {
                Lin y = lin(t->args[1]);
                if (y.a.empty() && y.c != 0) return lin_scale(lin(t->args[0]), Rational(1) / y.c);
            }
        }
        int r0 = find(id(t));
        if (auto c = class_const(r0); c && c->is_num()) {
            r.c = c->as_rat();
            return r;
        }
        r.a[r0] = 1;
        return r;
    }

    bool all_int(const Lin& l) {
        for (const auto& [v, q] : l.a)
            if (!intish[v]) return false;
        return true;
    }

    // Makes a constraint non-strict over integers and divides by the coefficient gcd.
    Con tighten(Con c) {
        if (c.l.a.empty() || !all_int(c.l)) return c;
        BigInt m = lcm_den(c.l);
        Lin s = lin_scale(c.l, Rational(m));
        // s: sum a x + k (<|<=) 0 with integral a, k
        BigInt g = 0;
        for (const auto& [v, q] : s.a) g = boost::multiprecision::gcd(g, boost::multiprecision::numerator(q));
        BigInt k = boost::multiprecision::numerator(s.c);
        // sum a x <= -k  (or < -k, i.e. <= -k-1)
        BigInt rhs = -k - (c.strict ? 1 : 0);
        BigInt nr = floor_div(rhs, g);
        Con r;
        for (const auto& [v, q] : s.a) r.l.a[v] = Rational(boost::multiprecision::numerator(q) / g);
        r.l.c = Rational(-nr);
        r.strict = false;
        return r;
    }

    // true = satisfiable or undetermined
    bool fm(std::vector<Lin> eqs, std::vector<Con> cons) {
        // integer gcd test and Gaussian elimination of equalities
        while (!eqs.empty()) {
            Lin e = eqs.back();
            eqs.pop_back();
            if (e.a.empty()) {
                if (e.c != 0) return false;
                continue;
            }
            if (all_int(e)) {
                BigInt m = lcm_den(e);
                Lin s = lin_scale(e, Rational(m));
                BigInt g = 0;
                for (const auto& [v, q] : s.a) g = boost::multiprecision::gcd(g, boost::multiprecision::numerator(q));
                if (boost::multiprecision::numerator(s.c) % g != 0) return false;
            }
            auto [v, q] = *e.a.begin();
            // v = -(e - q v) / q
            Lin rest = e;
            rest.a.erase(v);
            Lin sol = lin_scale(rest, Rational(-1) / q);
            auto sub = [&](Lin& l) {
                auto it = l.a.find(v);
                if (it == l.a.end()) return;
                Rational k = it->second;
                l.a.erase(it);
                l = lin_add(l, sol, k);
            };
            for (auto& x : eqs) sub(x);
            for (auto& c : cons) sub(c.l);
        }
        std::vector<Con> cur;
        for (auto& c : cons) cur.push_back(tighten(c));
        for (int round = 0; round < 64; ++round) {
            std::set<int> vars;
            std::vector<Con> next;
            for (auto& c : cur) {
                if (c.l.a.empty()) {
                    if (c.strict ? !(c.l.c < 0) : !(c.l.c <= 0)) return false;
                    continue;
                }
                next.push_back(c);
                for (const auto& [v, q] : c.l.a) vars.insert(v);
            }
            cur = std::move(next);
            if (vars.empty()) return true;
            int best = -1;
            size_t cost = SIZE_MAX;
            for (int v : vars) {
                size_t p = 0, n = 0;
                for (const auto& c : cur) {
                    auto it = c.l.a.find(v);
                    if (it == c.l.a.end()) continue;
                    (it->second > 0 ? p : n)++;
                }
                if (p * n < cost) cost = p * n, best = v;
            }
            std::vector<Con> pos, neg;
            next.clear();
            for (auto& c : cur) {
                auto it = c.l.a.find(best);
                if (it == c.l.a.end()) next.push_back(c);
                else (it->second > 0 ? pos : neg).push_back(c);
            }
            for (const auto& p : pos)
                for (const auto& n : neg) {
                    Rational ap = p.l.a.at(best), an = -n.l.a.at(best);
                    Con r;
                    r.l = lin_add(lin_scale(p.l, an), n.l, ap);
                    r.l.a.erase(best);
                    r.strict = p.strict || n.strict;
                    next.push_back(tighten(r));
                }
            if (next.size() > 4000) return true;
            cur = std::move(next);
        }
        return true;
    }

    // true = possibly satisfiable
    bool check(const std::vector<Lit>& lits) {
        std::map<std::string, bool> opaque;
        for (const auto& l : lits) {
            if (l.k != Lit::T::Opaque) continue;
            auto [it, fresh] = opaque.emplace(l.key, !l.neg);
            if (!fresh && it->second != !l.neg) return false;
        }
        for (const auto& l : lits)
            if (l.k != Lit::T::Opaque) id(l.a), id(l.b);
        for (const auto& l : lits)
            if (l.k == Lit::T::Eq) unite(id(l.a), id(l.b));
        if (!close()) return false;
        for (const auto& l : lits)
            if (l.k == Lit::T::Ne && find(id(l.a)) == find(id(l.b))) return false;
        for (size_t i = 0; i < node.size(); ++i)
            if (integral(node[i])) intish[find(int(i))] = true;
        std::vector<Lin> eqs;
        std::vector<Con> cons;
        std::vector<const Lit*> nes;
        for (const auto& l : lits) {
            if (l.k == Lit::T::Eq && (numeric(l.a) || numeric(l.b))) eqs.push_back(lin_add(lin(l.a), lin(l.b), -1));
            if (l.k == Lit::T::Le || l.k == Lit::T::Lt) cons.push_back({lin_add(lin(l.a), lin(l.b), -1), l.k == Lit::T::Lt});
            if (l.k == Lit::T::Ne && (numeric(l.a) || numeric(l.b))) nes.push_back(&l);
        }
        // a numeric disequality is a < b or b < a
        if (nes.size() > 10) nes.resize(10);
        std::function<bool(size_t, std::vector<Con>&)> split = [&](size_t i, std::vector<Con>& cs) -> bool {
            if (i == nes.size()) return fm(eqs, cs);
            Lin d = lin_add(lin(nes[i]->a), lin(nes[i]->b), -1);
            for (int side = 0; side < 2; ++side) {
                cs.push_back({side == 0 ? d : lin_scale(d, -1), true});
                bool sat = split(i + 1, cs);
                cs.pop_back();
                if (sat) return true;
            }
            return false;
        };
        return split(0, cons);
    }
};

struct Search {
    const SortMap& sorts;
    size_t leaves = 0;
    bool aborted = false;

    bool literal(const FormulaPtr& f, bool neg, std::vector<Lit>& out) {
        if (f->kind == K::Not) return literal(f->sub[0], !neg, out);
        Lit l;
        if (f->kind == K::Eq) {
            l.k = neg ? Lit::T::Ne : Lit::T::Eq;
            l.a = f->t[0], l.b = f->t[1];
        } else if (f->kind == K::Atom && f->t[0]->kind == Term::Kind::App && f->t[0]->args.size() == 2 &&
                   (f->t[0]->name == "<" || f->t[0]->name == "<=" || f->t[0]->name == ">" ||
                    f->t[0]->name == ">=")) {
            const auto& op = f->t[0]->name;
            TermPtr a = f->t[0]->args[0], b = f->t[0]->args[1];
            bool strict = op == "<" || op == ">";
            if (op == ">" || op == ">=") std::swap(a, b);
            // now a < b or a <= b
            if (neg) {
                std::swap(a, b);
                strict = !strict;
            }
            l.k = strict ? Lit::T::Lt : Lit::T::Le;
            l.a = a, l.b = b;
        } else {
            l.k = Lit::T::Opaque;
            l.key = to_string(f);
            l.neg = neg;
        }
        out.push_back(std::move(l));
        return true;
    }

    // true = some disjunct possibly satisfiable
    bool sat(std::vector<FormulaPtr> todo, std::vector<Lit> lits) {
        while (!todo.empty()) {
            FormulaPtr f = todo.back();
            todo.pop_back();
            switch (f->kind) {
            case K::True: break;
            case K::False: return false;
            case K::And:
                todo.push_back(f->sub[1]);
                todo.push_back(f->sub[0]);
                break;
            case K::Or: {
                for (const auto& d : f->sub) {
                    if (aborted) return true;
                    auto t2 = todo;
                    t2.push_back(d);
                    if (sat(std::move(t2), lits)) return true;
                }
                return false;
            }
            default: literal(f, false, lits);
            }
        }
        if (++leaves > 4096) {
            aborted = true;
            return true;
        }
        Theory th(sorts);
        return th.check(lits);
    }
};

// ---- model search

void collect_fields(const TermPtr& t, std::map<std::string, std::set<std::string>>& heaps) {
    if ((is_app(t, "select", 2) || is_app(t, "store", 3)) && t->args[1]->kind == Term::Kind::FieldName) {
        const TermPtr* h = &t->args[0];
        while (is_app(*h, "store", 3)) h = &(*h)->args[0];
        if ((*h)->kind == Term::Kind::Var) heaps[(*h)->name].insert(t->args[1]->name);
    }
    for (const auto& a : t->args) collect_fields(a, heaps);
}
void collect_fields(const FormulaPtr& f, std::map<std::string, std::set<std::string>>& heaps) {
    for (const auto& t : f->t) collect_fields(t, heaps);
    if (f->ev)
        for (const auto& t : f->ev->args) collect_fields(t, heaps);
    for (const auto& s : f->sub) collect_fields(s, heaps);
}
void collect_ints(const TermPtr& t, std::set<BigInt>& out) {
    if (t->kind == Term::Kind::Const && t->val.is_int()) out.insert(t->val.as_int());
    for (const auto& a : t->args) collect_ints(a, out);
}
void collect_ints(const FormulaPtr& f, std::set<BigInt>& out) {
    for (const auto& t : f->t) collect_ints(t, out);
    for (const auto& s : f->sub) collect_ints(s, out);
}

std::vector<Value> domain(const Sort& s, const std::set<BigInt>& ints) {
    std::vector<Value> d;
    auto num = [&] {
        for (long k : {0L, 1L, -1L, 2L, -2L, 3L}) d.emplace_back(k);
        for (const auto& c : ints)
            for (int k = -1; k <= 1; ++k) {
                Value v{BigInt(c + k)};
                if (std::find(d.begin(), d.end(), v) == d.end()) d.push_back(v);
            }
    };
    switch (s.kind) {
    case Sort::Kind::Bool: return {Value(false), Value(true)};
    case Sort::Kind::Unit: return {Value::unit()};
    case Sort::Kind::Fut: return {Value::future(1), Value::future(2)};
    case Sort::Kind::Obj: return {Value::object("o1"), Value::object("o2")};
    case Sort::Kind::List: return {Value::list({}), Value::list({Value(0)}), Value::list({Value(1), Value(0)})};
    case Sort::Kind::Rat:
        num();
        d.emplace_back(Rational(1, 2));
        d.emplace_back(Rational(-1, 2));
        return d;
    case Sort::Kind::Nat:
        num();
        d.erase(std::remove_if(d.begin(), d.end(), [](const Value& v) { return v.as_int() < 0; }), d.end());
        return d;
    default: num(); return d;
    }
}

std::optional<std::map<std::string, std::string>> find_model(const FormulaPtr& F, const SortMap& sorts) {
    std::map<std::string, std::set<std::string>> heaps;
    collect_fields(F, heaps);
    std::set<BigInt> ints;
    collect_ints(F, ints);
    struct Slot {
        std::string var, field;  // field empty: plain variable
        std::vector<Value> dom;
    };
    std::vector<Slot> slots;
    for (const auto& v : free_vars(F)) {
        if (heaps.count(v)) continue;
        Sort s{Sort::Kind::Int, ""};
        if (auto it = sorts.find(v); it != sorts.end()) s = it->second;
        if (s.kind == Sort::Kind::Heap) continue;
        slots.push_back({v, "", domain(s, ints)});
    }
    for (const auto& [h, fs] : heaps)
        for (const auto& f : fs) {
            Sort s{Sort::Kind::Int, ""};
            if (auto it = sorts.find("@" + f); it != sorts.end()) s = it->second;
            slots.push_back({h, f, domain(s, ints)});
        }
    const size_t budget = 20000;
    double total = 1;
    for (const auto& s : slots) total *= double(s.dom.size());
    std::mt19937_64 rng(0x5eed);
    std::vector<size_t> idx(slots.size(), 0);
    ObjState empty;
    for (size_t n = 0; n < budget; ++n) {
        if (total <= double(budget)) {
            if (n >= size_t(total)) break;
            size_t k = n;
            for (size_t i = slots.size(); i-- > 0;) {
                idx[i] = k % slots[i].dom.size();
                k /= slots[i].dom.size();
            }
        } else {
            for (size_t i = 0; i < slots.size(); ++i) idx[i] = rng() % slots[i].dom.size();
        }
        Beta b;
        for (const auto& [h, fs] : heaps) {
            LVal hv;
            hv.kind = LVal::Kind::Heap;
            b[h] = hv;
        }
        for (size_t i = 0; i < slots.size(); ++i) {
            const Value& v = slots[i].dom[idx[i]];
            if (slots[i].field.empty()) b[slots[i].var] = LVal::of(v);
            else b[slots[i].var].heap[slots[i].field] = v;
        }
        TV r;
        try {
            r = eval_fos(F, empty, b);
        } catch (const LogicError&) {
            return std::nullopt;
        }
        if (r == TV::True) {
            std::map<std::string, std::string> m;
            for (size_t i = 0; i < slots.size(); ++i) {
                std::string k = slots[i].field.empty() ? slots[i].var : slots[i].var + "." + slots[i].field;
                m[k] = to_string(slots[i].dom[idx[i]]);
            }
            return m;
        }
    }
    return std::nullopt;
}

bool has_trace_parts(const FormulaPtr& f) {
    if (f->kind == K::EvAt || f->kind == K::StateAt || f->kind == K::Pred || f->kind == K::Subset ||
        f->kind == K::ExistsSet || f->kind == K::ForallSet)
        return true;
    for (const auto& s : f->sub)
        if (has_trace_parts(s)) return true;
    return false;
}

}  // namespace

VcResult discharge_vc(const std::vector<FormulaPtr>& gamma, const FormulaPtr& phi, const SortMap& sorts) {
    VcResult res;
    std::vector<FormulaPtr> parts;
    for (const auto& g : gamma) parts.push_back(simplify(g));
    FormulaPtr goal = simplify(phi);
    FormulaPtr F = f_and(f_and(parts), f_not(goal));
    FormulaPtr N = nnf(structurize(nnf(F)));
    N = nnf(N);
    Search s{sorts, 0, false};
    bool maybe = s.sat({N}, {});
    if (!maybe) {
        res.v = Validity::Valid;
        return res;
    }
    if (s.aborted) res.reason = "case split limit reached";
    if (!has_trace_parts(F)) {
        if (auto m = find_model(F, sorts)) {
            res.v = Validity::Invalid;
            res.model = *m;
            res.reason = "counterexample";
            return res;
        }
    }
    res.v = Validity::Unknown;
    if (res.reason.empty()) res.reason = "not closed by congruence and linear arithmetic; no small counterexample";
    return res;
}

// ---------------------------------------------------------------- SMT-LIB

namespace {

struct Smt {
    const SortMap& sorts;
    std::map<std::string, std::string> decls;  // name -> declaration line
    std::map<std::string, std::string> abstr;  // printed term -> fresh constant
    int fresh = 0;

    static std::string q(const std::string& n) { return "|" + n + "|"; }

    std::string sort_name(const Sort& s) const {
        switch (s.kind) {
        case Sort::Kind::Int:
        case Sort::Kind::Nat:
        case Sort::Kind::Pos: return "Int";
        case Sort::Kind::Rat: return "Real";
        case Sort::Kind::Bool: return "Bool";
        case Sort::Kind::Heap: return "Heap";
        case Sort::Kind::List: return "List";
        case Sort::Kind::Fut: return "Fut";
        case Sort::Kind::Obj: return "Obj";
        default: return "Int";
        }
    }
    std::string sort_of_name(const std::string& n) const {
        auto it = sorts.find(n);
        if (it != sorts.end()) return sort_name(it->second);
        // heap and its fresh copies heap'k
        if (n == "heap" || n.rfind("heap'", 0) == 0) return "Heap";
        return "Int";
    }
    std::string abstract(const std::string& key, const std::string& sort) {
        auto it = abstr.find(key);
        if (it != abstr.end()) return it->second;
        std::string n = q("k!" + std::to_string(fresh++));
        decls[n] = "(declare-const " + n + " " + sort + ")";
        return abstr[key] = n;
    }

    std::string value(const Value& v) {
        if (v.is_bool()) return v.as_bool() ? "true" : "false";
        if (v.is_int()) return v.as_int() < 0 ? "(- " + BigInt(-v.as_int()).str() + ")" : v.as_int().str();
        if (v.is_rat()) {
            Rational r = v.as_rat();
            std::string n = boost::multiprecision::numerator(r).str(), d = boost::multiprecision::denominator(r).str();
            if (r < 0) n = "(- " + BigInt(-boost::multiprecision::numerator(r)).str() + ")";
            return "(/ " + n + " " + d + ")";
        }
        if (v.is_list() && v.as_list().empty()) {
            decls["Nil"] = "(declare-const Nil List)";
            return "Nil";
        }
        std::string s = v.is_future() ? "Fut" : v.is_object() ? "Obj" : v.is_list() ? "List" : "Int";
        return abstract(to_string(v), s);
    }

    std::string term(const TermPtr& t, const std::set<std::string>& bound) {
        switch (t->kind) {
        case Term::Kind::Var:
            if (!bound.count(t->name)) decls[q(t->name)] = "(declare-const " + q(t->name) + " " + sort_of_name(t->name) + ")";
            return q(t->name);
        case Term::Kind::Const: return value(t->val);
        case Term::Kind::App: break;
        default: return abstract(to_string(t), "Int");
        }
        const auto& f = t->name;
        std::vector<std::string> xs;
        if ((f == "select" || f == "store") && t->args.size() >= 2 && t->args[1]->kind == Term::Kind::FieldName) {
            const std::string& fld = t->args[1]->name;
            std::string fs = sort_of_name("@" + fld);
            std::string h = term(t->args[0], bound);
            if (f == "select") {
                decls[q("select_" + fld)] = "(declare-fun " + q("select_" + fld) + " (Heap) " + fs + ")";
                return "(" + q("select_" + fld) + " " + h + ")";
            }
            decls[q("store_" + fld)] = "(declare-fun " + q("store_" + fld) + " (Heap " + fs + ") Heap)";
            return "(" + q("store_" + fld) + " " + h + " " + term(t->args[2], bound) + ")";
        }
        for (const auto& a : t->args) xs.push_back(term(a, bound));
        auto join = [&](const std::string& op) {
            std::string s = "(" + op;
            for (const auto& x : xs) s += " " + x;
            return s + ")";
        };
        if (f == "+" || f == "-" || f == "*" || f == "/" || f == "<" || f == "<=" || f == ">" || f == ">=") return join(f);
        if (f == "&&") return join("and");
        if (f == "||") return join("or");
        if (f == "!") return join("not");
        if (f == "==") return join("=");
        if (f == "!=") return "(not " + join("=") + ")";
        if (f == "hd" || f == "tl" || f == "len" || f == "Cons") {
            static const std::map<std::string, std::string> sig = {{"hd", "(List) Int"},
                                                                    {"tl", "(List) List"},
                                                                    {"len", "(List) Int"},
                                                                    {"Cons", "(Int List) List"}};
            decls[f] = "(declare-fun " + f + " " + sig.at(f) + ")";
            return join(f);
        }
        return abstract(to_string(t), "Int");
    }

    std::string formula(const FormulaPtr& f, std::set<std::string> bound) {
        auto sub = [&](size_t i) { return formula(f->sub[i], bound); };
        switch (f->kind) {
        case K::True: return "true";
        case K::False: return "false";
        case K::Atom: return term(f->t[0], bound);
        case K::Eq: return "(= " + term(f->t[0], bound) + " " + term(f->t[1], bound) + ")";
        case K::Not: return "(not " + sub(0) + ")";
        case K::And: return "(and " + sub(0) + " " + sub(1) + ")";
        case K::Or: return "(or " + sub(0) + " " + sub(1) + ")";
        case K::Implies: return "(=> " + sub(0) + " " + sub(1) + ")";
        case K::Iff: return "(= " + sub(0) + " " + sub(1) + ")";
        case K::Exists:
        case K::Forall: {
            bound.insert(f->var);
            std::string b = formula(f->sub[0], bound);
            return std::string("(") + (f->kind == K::Exists ? "exists" : "forall") + " ((" + q(f->var) + " " +
                   sort_name(f->sort) + ")) " + b + ")";
        }
        default: return abstract(to_string(f), "Bool");
        }
    }
};

}  // namespace

std::string to_smtlib(const std::vector<FormulaPtr>& gamma, const FormulaPtr& phi, const SortMap& sorts) {
    Smt s{sorts, {}, {}, 0};
    std::vector<std::string> asserts;
    for (const auto& g : gamma) asserts.push_back(s.formula(simplify(g), {}));
    asserts.push_back("(not " + s.formula(simplify(phi), {}) + ")");
    std::ostringstream os;
    os << "(set-logic ALL)\n";
    os << "(declare-sort Heap 0)\n(declare-sort List 0)\n(declare-sort Fut 0)\n(declare-sort Obj 0)\n";
    for (const auto& [k, d] : s.decls) os << d << "\n";
    for (const auto& a : asserts) os << "(assert " << a << ")\n";
    os << "(check-sat)\n";
    return os.str();
}

}  // namespace cao
